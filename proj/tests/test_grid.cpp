#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "quasibel/grid.hpp"
#include "quasibel/norms.hpp"

using namespace qbel;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("square lattice: node count, uniform weights, area") {
  auto g = make_grid(GridKind::SquareLattice, 8, 1.0);
  CHECK(g->size() == 64);
  for (double w : g->weights) CHECK(w == doctest::Approx(0.0625).epsilon(1e-14));
  double area = 0;
  for (double w : g->weights) area += w;
  CHECK(area == doctest::Approx(4.0).epsilon(1e-10));
  for (Complex z : g->nodes) {
    CHECK(std::abs(z.real()) < 1.0);
    CHECK(std::abs(z.imag()) < 1.0);
  }
}

TEST_CASE("strip grid: phi spacing 2pi/n, phi = pi excluded") {
  auto g = make_grid_strip(16, -4.0, 1.0);
  CHECK(g->size() == 256);
  CHECK(g->hy == doctest::Approx(2.0 * kPi / 16));
  for (Complex z : g->nodes) {
    CHECK(z.imag() >= -kPi);
    CHECK(z.imag() < kPi);
    CHECK(z.real() > -4.0);
    CHECK(z.real() < 1.0);
  }
  double area = 0;
  for (double w : g->weights) area += w;
  CHECK(area == doctest::Approx(5.0 * 2.0 * kPi).epsilon(1e-12));
}

TEST_CASE("grid preconditions rejected") {
  CHECK_THROWS_AS(make_grid(GridKind::SquareLattice, 7, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(GridKind::SquareLattice, 24, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(GridKind::SquareLattice, 16, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(GridKind::PolarDisk, 4, 1.0), std::invalid_argument);
}

TEST_CASE("sample: zero rule, identity rule, non-finite rejection") {
  auto g = make_grid(GridKind::SquareLattice, 8, 1.0);
  auto z0 = sample([](Complex) { return Complex{0, 0}; }, g);
  for (auto v : z0.values) CHECK(v == Complex{0, 0});

  auto id = sample([](Complex z) { return z; }, g);
  for (std::size_t i = 0; i < g->size(); ++i) CHECK(id.values[i] == g->nodes[i]);

  auto gp = make_grid(GridKind::PolarDisk, 8, 1.0);
  // rule blows up on part of the sampled region
  CHECK_THROWS_AS(
      sample([](Complex z) { return Complex{1.0 / std::max(0.0, 0.5 - std::abs(z)), 0}; }, gp),
      std::domain_error);
}

TEST_CASE("weighted norm: constant on the disk has L2 norm sqrt(pi)") {
  for (int n : {128, 256}) {
    auto g = make_grid(GridKind::SquareLattice, n, 1.25);
    auto f = sample([](Complex z) { return std::abs(z) < 1.0 ? Complex{1, 0} : Complex{0, 0}; }, g);
    double norm = weighted_norm(f, WeightedNormSpec(2.0, 0.0, DomainGeometry::plane()));
    // quadrature error O(h) from the boundary cells
    CHECK(norm == doctest::Approx(std::sqrt(kPi)).epsilon(4.0 * g->spacing()));
  }
}

TEST_CASE("weighted norm: boundary weight cancels (1-|z|)^{-1} exactly at p=inf, s=1") {
  auto g = make_grid(GridKind::SquareLattice, 64, 1.0);
  SampledField f(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    double r = std::abs(g->nodes[i]);
    f.values[i] = r < 1.0 ? Complex{1.0 / (1.0 - r), 0} : Complex{0, 0};
  }
  double norm = weighted_norm(f, WeightedNormSpec(kInfExponent, 1.0, DomainGeometry::disk()));
  CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

// Oracle: 2 pi Int_0^{1-h} (1-r)^{-2} r dr by asymptotically exact Gauss panels.
static double radial_oracle(double h) {
  double total = 0.0;
  int panels = 4000;
  double lo = 0.0, hi = 1.0 - h;
  for (int i = 0; i < panels; ++i) {
    double a = lo + (hi - lo) * i / panels;
    double b = lo + (hi - lo) * (i + 1) / panels;
    double m = 0.5 * (a + b), w = b - a;
    double g1 = m - 0.5 * w / std::sqrt(3.0), g2 = m + 0.5 * w / std::sqrt(3.0);
    auto f = [](double r) { return r / ((1.0 - r) * (1.0 - r)); };
    total += 0.5 * w * (f(g1) + f(g2));
  }
  return 2.0 * kPi * total;
}

TEST_CASE("weighted norm: (1-|z|)^{-1} at p=2, s=0 diverges with resolution") {
  // truncated at 1-h so the lattice sum tracks the one-dimensional radial
  // oracle (untruncated, individual nodes land arbitrarily close to |z|=1)
  double prev = 0;
  for (int n : {64, 128, 256}) {
    auto g = make_grid(GridKind::SquareLattice, n, 1.0);
    double h = g->spacing();
    SampledField f(g);
    for (std::size_t i = 0; i < g->size(); ++i) {
      double r = std::abs(g->nodes[i]);
      if (r <= 1.0 - h) f.values[i] = Complex{1.0 / (1.0 - r), 0};
    }
    double norm = weighted_norm(f, WeightedNormSpec(2.0, 0.0, DomainGeometry::plane()));
    double oracle = std::sqrt(radial_oracle(h));
    CHECK(norm > prev * 1.15);  // grows without bound
    CHECK(norm > 0.4 * oracle);
    CHECK(norm < 2.5 * oracle);
    prev = norm;
  }
}

TEST_CASE("weighted norm properties: homogeneity, s-monotonicity, refinement") {
  auto g = make_grid(GridKind::SquareLattice, 64, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss;
  SampledField f(g);
  for (std::size_t i = 0; i < g->size(); ++i) {
    if (std::abs(g->nodes[i]) < 1.0) f.values[i] = Complex{gauss(rng), gauss(rng)};
  }

  WeightedNormSpec l2(2.0, 0.0, DomainGeometry::plane());
  Complex c{-1.7, 2.3};
  double lhs = weighted_norm(c * f, l2);
  double rhs = std::abs(c) * weighted_norm(f, l2);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));

  // s1 <= s2 implies norm(f, s2) <= norm(f, s1) when the weight is <= 1
  for (double p : {2.0, 4.0, kInfExponent}) {
    double n0 = weighted_norm(f, WeightedNormSpec(p, 0.5, DomainGeometry::disk()));
    double n1 = weighted_norm(f, WeightedNormSpec(p, 1.5, DomainGeometry::disk()));
    CHECK(n1 <= n0 * (1 + 1e-14));
  }

  // smooth field: refinement changes the norm by O(h)
  auto smooth = [](Complex z) {
    double r2 = std::norm(z / 0.8);
    return r2 < 1 ? Complex{std::exp(-1.0 / (1.0 - r2)), 0.3} : Complex{0, 0.3};
  };
  auto ga = make_grid(GridKind::SquareLattice, 64, 1.0);
  auto gb = make_grid(GridKind::SquareLattice, 128, 1.0);
  double na = weighted_norm(sample(smooth, ga), l2);
  double nb = weighted_norm(sample(smooth, gb), l2);
  CHECK(std::abs(na - nb) < 4.0 * ga->spacing());
}

TEST_CASE("pairwise summation is deterministic and accurate") {
  std::vector<double> xs(100001);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  long double ref = 0;
  for (auto& x : xs) {
    x = u(rng);
    ref += x;
  }
  double s1 = pairwise_sum(xs);
  double s2 = pairwise_sum(xs);
  CHECK(s1 == s2);
  CHECK(s1 == doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
}
