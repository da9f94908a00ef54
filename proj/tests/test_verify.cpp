#include <cmath>
#include <sstream>

#include "doctest.h"
#include "quasibel/norms.hpp"
#include "quasibel/verify.hpp"
#include "test_util.hpp"

using namespace qbel;
using namespace qbel::testutil;

TEST_CASE("operator_norm_estimate: zero operator, beurling band, p monotonicity") {
  OperatorSpec zero(OperatorFamily::Zero, 0, DomainGeometry::plane());
  CHECK(operator_norm_estimate(zero, 2.0, 8, 7, 64) == 0.0);

  OperatorSpec S(OperatorFamily::Beurling, 0, DomainGeometry::plane());
  double e2 = operator_norm_estimate(S, 2.0, 64, 7, 128);
  CHECK(e2 >= 0.999);
  CHECK(e2 <= 1.001);

  double e25 = operator_norm_estimate(S, 2.5, 32, 7, 128);
  double e3 = operator_norm_estimate(S, 3.0, 32, 7, 128);
  CHECK(e25 >= e2 - 1e-3);
  CHECK(e3 >= e25 - 1e-3);
}

TEST_CASE("operator_norm_estimate: prefix property and determinism") {
  OperatorSpec S(OperatorFamily::Beurling, 0, DomainGeometry::plane());
  double a32 = operator_norm_estimate(S, 2.0, 32, 11, 64);
  double a64 = operator_norm_estimate(S, 2.0, 64, 11, 64);
  CHECK(a64 >= a32);  // adding trials never decreases the bound
  CHECK(operator_norm_estimate(S, 2.0, 32, 11, 64) == a32);
}

TEST_CASE("counter-term inflates the L2 norm: ||S_1|| >= 1") {
  OperatorSpec S1(OperatorFamily::BeurlingM, 1, DomainGeometry::disk());
  double est = operator_norm_estimate(S1, 2.0, 64, 7, 128);
  CHECK(est >= 1.0);
}

TEST_CASE("decay_exponent_fit: constructed power laws and errors") {
  auto g = make_grid(GridKind::SquareLattice, 256, 1.25);
  double h = g->spacing();
  auto geom = DomainGeometry::disk();

  SampledField f(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    double r = std::abs(g->nodes[i]);
    if (r < 1.0) f.values[i] = Complex{std::pow(1.0 - r, -0.5), 0};
  }
  auto fit = decay_exponent_fit(f, geom, {4 * h, 0.2});
  CHECK(std::abs(fit.exponent - 0.5) <= 0.05);

  SampledField c(g);
  for (std::size_t i = 0; i < g->size(); ++i)
    if (std::abs(g->nodes[i]) < 1.0) c.values[i] = Complex{0.7, 0.2};
  auto fit0 = decay_exponent_fit(c, geom, {4 * h, 0.2});
  CHECK(std::abs(fit0.exponent) <= 0.05);

  // invariance under scaling
  auto fit_scaled = decay_exponent_fit(Complex{3.0, -1.0} * f, geom, {4 * h, 0.2});
  CHECK(std::abs(fit_scaled.exponent - fit.exponent) <= 1e-12);

  // too-narrow band: fewer than 4 usable rings
  CHECK_THROWS_AS(decay_exponent_fit(f, geom, {4 * h, 5 * h}), std::invalid_argument);
}

TEST_CASE("right_inverse_residual: zero field and smooth bump") {
  auto g = make_grid(GridKind::SquareLattice, 128, 2.0);
  OperatorSpec C(OperatorFamily::Cauchy, 0, DomainGeometry::plane());
  SampledField zero(g);
  CHECK(right_inverse_residual(C, zero) == 0.0);

  auto f = sample([](Complex z) { return cap(z, {0, 0}, 0.7) * Complex{1.0, 0.5}; }, g);
  CHECK(right_inverse_residual(C, f) <= 5e-3);
}

TEST_CASE("run_suite: empty config, registry lookup, unknown name") {
  SuiteConfig cfg;
  CHECK(run_suite(cfg).empty());

  cfg.checks = {"kz-norm"};
  cfg.n = 64;
  auto reports = run_suite(cfg);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].id == "kz-norm");
  CHECK(reports[0].anchor.find("tends to 1 as p -> 2") != std::string::npos);

  cfg.checks = {"no-such-check"};
  CHECK_THROWS_AS(run_suite(cfg), std::invalid_argument);

  CHECK(registered_checks().size() == 15);
}

TEST_CASE("run_suite determinism: byte-identical bodies, timings excluded") {
  SuiteConfig cfg;
  cfg.checks = {"pm-disk-reduction", "th-isometry"};
  cfg.n = 64;
  cfg.seed = 9;
  std::ostringstream a, b;
  write_reports_jsonl(a, run_suite(cfg), false);
  write_reports_jsonl(b, run_suite(cfg), false);
  CHECK(a.str() == b.str());
  CHECK(a.str().find("\"pass\"") != std::string::npos);
}
