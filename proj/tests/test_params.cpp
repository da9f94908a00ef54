#include <cmath>
#include <random>

#include "doctest.h"
#include "quasibel/expr.hpp"
#include "quasibel/params.hpp"
#include "test_util.hpp"

using namespace qbel;
using namespace qbel::testutil;

namespace {

FamilySpec linear_family(double scale = 0.3) {
  FamilySpec fam;
  fam.t_dim = 1;
  fam.box_lo = {0.0};
  fam.box_hi = {0.5};
  fam.d = 0.35;
  fam.rule = [scale](Complex z, std::span<const double> t) {
    return Complex{scale, 0.1} * t[0] * cap(z, {0, 0}, 0.8) * 2.0;
  };
  return fam;
}

}  // namespace

TEST_CASE("holder_modulus: t-independent family returns the saturated sentinel") {
  FamilySpec fam = linear_family();
  fam.rule = [](Complex z, std::span<const double>) { return 0.25 * cap(z, {0, 0}, 0.8); };
  HolderOptions opts;
  opts.k = 0;
  auto res = holder_modulus(fam, opts, {{0.1, 0.0}, {0.3, 0.2}});
  CHECK(res.saturated);
}

TEST_CASE("holder_modulus: Lipschitz family fits slope near 1") {
  // mu(z, t) = t * 0.3 chi-like bump: differences scale linearly in dt
  FamilySpec fam;
  fam.t_dim = 1;
  fam.box_lo = {0.0};
  fam.box_hi = {0.5};
  fam.d = 0.31;
  fam.rule = [](Complex z, std::span<const double> t) {
    return Complex{0.3, 0} * t[0] * 2.0 * cap(z, {0, 0}, 0.55);
  };
  HolderOptions opts;
  opts.k = 0;
  auto res = holder_modulus(fam, opts, {{0.1, 0.0}, {0.35, 0.1}, {-0.2, 0.3}});
  CHECK(!res.saturated);
  CHECK(res.beta_min >= 0.9);
  CHECK(res.beta_min <= 1.1);
  CHECK(res.r2_min >= 0.9);
}

TEST_CASE("mollify_family: t-constant family unchanged to rounding") {
  FamilySpec fam = linear_family();
  fam.rule = [](Complex z, std::span<const double>) {
    return Complex{0.2, -0.05} * cap(z, {0.1, 0}, 0.6);
  };
  auto smooth = mollify_family(fam, MollifierSchedule{}, 2);
  for (double r : {0.1, 0.4, 0.7}) {
    Complex z = std::polar(r, 1.1);
    std::vector<double> t{0.25};
    CHECK(std::abs(smooth.rule(z, t) - fam.rule(z, t)) <= 1e-12);
  }
}

TEST_CASE("mollify_family: linear-in-t family reproduced exactly (odd moments vanish)") {
  FamilySpec fam = linear_family();
  auto smooth = mollify_family(fam, MollifierSchedule{}, 2);
  for (double r : {0.2, 0.5}) {
    Complex z = std::polar(r, 0.4);
    for (double tv : {0.3, 0.45}) {
      std::vector<double> t{tv};
      CHECK(std::abs(smooth.rule(z, t) - fam.rule(z, t)) <= 1e-12);
    }
  }
}

TEST_CASE("mollify_family: sup difference bounded by the target near fixed z") {
  FamilySpec fam;
  fam.t_dim = 1;
  fam.box_lo = {0.0};
  fam.box_hi = {1.0};
  fam.d = 0.45;
  // quadratic t-dependence so mollification causes a genuine difference
  fam.rule = [](Complex z, std::span<const double> t) {
    return Complex{0.4, 0} * t[0] * t[0] * cap(z, {0, 0}, 0.7);
  };
  MollifierSchedule sched;
  sched.b = 0.01;
  sched.beta = 1.0;  // radius rule delta = b / (1 - r): a visible smoothing
  sched.s = 0.0;
  auto smooth = mollify_family(fam, sched, 0);
  Complex z{0.5, 0.0};
  double worst = 0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.3, 0.7);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> t{u(rng)};
    worst = std::max(worst, std::abs(smooth.rule(z, t) - fam.rule(z, t)));
  }
  CHECK(worst <= sched.b);
  CHECK(worst > 0);
}

TEST_CASE("mollify_family: radius collapse below t_spacing is an error") {
  FamilySpec fam = linear_family();
  MollifierSchedule sched;
  sched.t_spacing = 1e-3;
  auto smooth = mollify_family(fam, sched, 3);
  std::vector<double> t{0.25};
  // near the boundary the radius rule collapses
  CHECK_THROWS_AS(smooth.rule(Complex{0.999, 0.0}, t), std::domain_error);
}

TEST_CASE("mollification invariants: d never grows, conjugation commutes") {
  FamilySpec fam = linear_family();
  auto smooth = mollify_family(fam, MollifierSchedule{}, 2);
  CHECK(smooth.d <= fam.d);

  FamilySpec conj_fam = fam;
  auto inner = fam.rule;
  conj_fam.rule = [inner](Complex z, std::span<const double> t) {
    return std::conj(inner(z, t));
  };
  auto a = mollify_family(conj_fam, MollifierSchedule{}, 2);
  auto b = mollify_family(fam, MollifierSchedule{}, 2);
  for (double r : {0.2, 0.6}) {
    Complex z = std::polar(r, 2.0);
    std::vector<double> t{0.2};
    CHECK(std::abs(a.rule(z, t) - std::conj(b.rule(z, t))) <= 1e-14);
  }
}

TEST_CASE("holder symmetry: differences agree under relabeling t <-> t+dt") {
  FamilySpec fam = linear_family();
  auto g = make_grid(GridKind::SquareLattice, 64, 1.25);
  auto solve_at = [&](double tv) {
    std::vector<double> t{tv};
    auto mu = BeltramiCoefficient::from_rule(
        [&fam, t](Complex z) { return std::abs(z) < 1 ? fam.rule(z, t) : Complex{0, 0}; },
        g, fam.d);
    return normal_solution(mu);
  };
  auto a = solve_at(0.1);
  auto b = solve_at(0.3);
  Complex probe{0.2, 0.1};
  double d1 = std::abs(interp_bilinear(a.f, probe) - interp_bilinear(b.f, probe));
  double d2 = std::abs(interp_bilinear(b.f, probe) - interp_bilinear(a.f, probe));
  CHECK(d1 == d2);
  double tol = 2.0 * std::max(a.diagnostics.residual, b.diagnostics.residual);
  CHECK(std::abs(d1 - d2) <= tol);
}

TEST_CASE("family expression language round trip") {
  std::string text = R"({
    "d": 0.4, "t_dim": 1, "box": {"lo": [0.0], "hi": [0.5]},
    "terms": [
      {"coef": [0.3, 0.0], "t_pow": [1], "bump": "cap", "center": [0, 0], "radius": 0.8},
      {"coef": [0.05, 0.02], "z_pow": 1, "zbar_pow": 0, "t_pow": [0], "bump": "indicator",
       "radius": 0.5}
    ],
    "growth": [[1, 0.4]],
    "param_growth": [2.0, 1.0]
  })";
  auto fam = parse_family_json(text);
  CHECK(fam.t_dim == 1);
  CHECK(fam.d == 0.4);
  std::vector<double> t{0.5};
  Complex z{0.2, 0.1};
  Complex expect = Complex{0.3, 0} * 0.5 * cap(z, {0, 0}, 0.8) + Complex{0.05, 0.02} * z;
  CHECK(std::abs(fam.rule(z, t) - expect) <= 1e-15);
  CHECK(fam.growth.size() == 1);
  CHECK(fam.param_growth.has_value());

  CHECK_THROWS(parse_family_json(R"({"d": 0.4, "box": {"lo": [0], "hi": [1]},
    "terms": [{"coef": [0.3, 0], "bump": "wiggle"}]})"));
}

TEST_CASE("mollifier cap kernel has unit mass") {
  for (int dim : {1, 2, 3}) CHECK(std::abs(mollifier_kernel_mass(dim) - 1.0) <= 1e-10);
}
