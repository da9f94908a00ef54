#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "quasibel/qbf.hpp"
#include "quasibel/render.hpp"
#include "quasibel/solver.hpp"
#include "test_util.hpp"

using namespace qbel;
using namespace qbel::testutil;

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  auto dir = fs::temp_directory_path() / "quasibel_test";
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  std::string cmd = std::string(QUASIBEL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("QBF-1 round trip is bit exact") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  for (int variant = 0; variant < 2; ++variant) {
    GridPtr g = variant == 0 ? make_grid(GridKind::SquareLattice, 16, 1.25)
                             : make_grid_strip(16, -3.0, 0.5);
    SampledField f(g, "roundtrip");
    for (auto& v : f.values) v = Complex{gauss(rng) * std::exp(gauss(rng)), gauss(rng)};

    std::stringstream ss;
    write_qbf(ss, f, "test");
    auto back = read_qbf(ss);
    REQUIRE(back.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      CHECK(back.values[i].real() == f.values[i].real());
      CHECK(back.values[i].imag() == f.values[i].imag());
    }
    CHECK(back.label == "roundtrip");
  }
}

TEST_CASE("QBF-1 rejects malformed input") {
  CHECK_THROWS(read_qbf_file("/nonexistent/path.qbf"));
  std::stringstream bad("{\"kind\":\"square-lattice\",\"n\":16,\"extent\":1.0}\n1,2,3\n");
  CHECK_THROWS(read_qbf(bad));
}

TEST_CASE("render grid: identity map gives axis-parallel polylines") {
  auto g = make_grid(GridKind::SquareLattice, 16, 1.0);
  auto f = sample([](Complex z) { return z; }, g);
  std::stringstream ss;
  render_grid_csv(ss, f, 4);
  std::string line;
  int rows = 0, cols = 0;
  while (std::getline(ss, line)) {
    std::stringstream ls(line);
    std::string kind, idx;
    std::getline(ls, kind, ',');
    std::getline(ls, idx, ',');
    std::vector<double> nums;
    std::string tok;
    while (std::getline(ls, tok, ',')) nums.push_back(std::stod(tok));
    REQUIRE(nums.size() == 32);
    if (kind == "row") {
      ++rows;  // constant imaginary part along a row of the identity
      for (std::size_t i = 3; i < nums.size(); i += 2) CHECK(nums[i] == nums[1]);
    } else {
      ++cols;
      for (std::size_t i = 2; i < nums.size(); i += 2) CHECK(nums[i] == nums[0]);
    }
  }
  CHECK(rows == 4);
  CHECK(cols == 4);
}

TEST_CASE("render grid: affine shear matches the closed form") {
  auto g = make_grid(GridKind::SquareLattice, 16, 1.0);
  auto f = sample([](Complex z) { return z + 0.5 * std::conj(z); }, g);
  std::stringstream ss;
  render_grid_csv(ss, f, 16);
  std::string line;
  std::getline(ss, line);
  std::stringstream ls(line);
  std::string kind, idx;
  std::getline(ls, kind, ',');
  std::getline(ls, idx, ',');
  for (int ix = 0; ix < 16; ++ix) {
    std::string a, b;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    Complex z = g->nodes[g->index(ix, 0)];
    Complex expect = z + 0.5 * std::conj(z);
    CHECK(std::abs(Complex{std::stod(a), std::stod(b)} - expect) <= 1e-12);
  }
}

TEST_CASE("render heat: zero field gives a uniform black graymap") {
  auto g = make_grid(GridKind::SquareLattice, 8, 1.0);
  SampledField f(g);
  std::stringstream ss;
  render_heat_pgm(ss, f);
  std::string magic;
  ss >> magic;
  CHECK(magic == "P2");
  int w, h, maxv;
  ss >> w >> h >> maxv;
  CHECK(w == 8);
  CHECK(h == 8);
  int pix, count = 0;
  while (ss >> pix) {
    CHECK(pix == 0);
    ++count;
  }
  CHECK(count == 64);
}

TEST_CASE("cli: exit codes for success, usage error, missing file") {
  auto dir = temp_dir();
  auto mu_path = (dir / "mu.qbf").string();
  auto out_path = (dir / "out.qbf").string();

  auto g = make_grid(GridKind::SquareLattice, 32, 2.0);
  auto mu = sample([](Complex z) { return 0.3 * cap(z, {0, 0}, 0.6); }, g);
  write_qbf_file(mu_path, mu);

  CHECK(run_cli("verify --suite pm-disk-reduction --n 64") == 0);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("verify --no-such-flag 3") == 2);
  CHECK(run_cli("solve --kind principal --mu " + (dir / "missing.qbf").string() + " --out " +
                out_path) == 2);
  CHECK(run_cli("solve --kind principal --mu " + mu_path + " --out " + out_path +
                " --report " + (dir / "rep.json").string()) == 0);
  CHECK(fs::exists(out_path));

  // transform through the CLI and check the provenance header survives reading
  CHECK(run_cli("transform --op beurling --in " + mu_path + " --out " +
                (dir / "s.qbf").string()) == 0);
  auto back = read_qbf_file((dir / "s.qbf").string());
  CHECK(back.size() == g->size());

  CHECK(run_cli("render --in " + mu_path + " --mode heat --out " + (dir / "h.pgm").string() +
                " --log") == 0);
  CHECK(run_cli("render --in " + mu_path + " --mode nope --out " + (dir / "x").string()) == 2);
}
