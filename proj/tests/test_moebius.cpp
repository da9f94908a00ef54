#include <cmath>
#include <numbers>

#include "doctest.h"
#include "quasibel/moebius.hpp"

using namespace qbel;

TEST_CASE("moebius: w maps to zero; boundary preserved") {
  DiskAutomorphism aut{Complex{0.5, 0}};
  CHECK(std::abs(apply_moebius(aut, Complex{0.5, 0})) == doctest::Approx(0.0));

  for (double th : {0.0, std::numbers::pi / 3, std::numbers::pi}) {
    Complex z = std::polar(1.0, th);
    CHECK(std::abs(apply_moebius(aut, z)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("moebius is an involution on a 32x32 sample") {
  DiskAutomorphism aut{Complex{0.3, 0.4}};
  double worst = 0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      Complex z{-0.95 + 1.9 * i / 31.0, -0.95 + 1.9 * j / 31.0};
      if (std::abs(z) >= 1.0) continue;
      Complex back = apply_moebius(aut, apply_moebius(aut, z));
      worst = std::max(worst, std::abs(back - z));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("affine ellipse map: identity at mu0=0, explicit values, inverse") {
  AffineEllipseMap id{Complex{0, 0}};
  CHECK(affine_forward(id, Complex{0.3, -0.2}) == Complex{0.3, -0.2});
  CHECK(affine_inverse(id, Complex{0.3, -0.2}) == Complex{0.3, -0.2});

  AffineEllipseMap g{Complex{0.5, 0}};
  CHECK(affine_forward(g, Complex{1, 0}) == Complex{1.5, 0});
  CHECK(std::abs(affine_inverse(g, Complex{1.5, 0}) - Complex{1, 0}) <= 1e-15);
  CHECK(affine_forward(g, Complex{0, 1}) == Complex{0, 0.5});

  // inverse of forward is the identity
  for (int k = 0; k < 16; ++k) {
    Complex z = std::polar(0.1 + 0.05 * k, 0.39 * k);
    Complex r = affine_inverse(g, affine_forward(g, z));
    CHECK(std::abs(r - z) <= 1e-15);
  }

  CHECK_THROWS_AS(AffineEllipseMap(Complex(1.0, 0.0)), std::invalid_argument);
}

TEST_CASE("reflect: disk inversion and pullback through the identity") {
  auto rule = ReflectionRule::disk_inversion();
  CHECK(std::abs(reflect(rule, Complex{0.5, 0}) - Complex{2.0, 0}) <= 1e-15);
  Complex r = reflect(rule, Complex{0, 0.5});
  CHECK(r.real() == doctest::Approx(0.0));
  CHECK(r.imag() == doctest::Approx(2.0));
  CHECK_THROWS_AS(reflect(rule, Complex{1.0, 0}), std::domain_error);

  auto ident = [](Complex z) { return z; };
  auto pull = ReflectionRule::pullback(DomainGeometry::disk(), ident, ident);
  for (int k = 1; k < 12; ++k) {
    Complex w = std::polar(0.07 * k, 0.5 * k);
    CHECK(std::abs(reflect(pull, w) - reflect(rule, w)) <= 1e-12);
  }
}

TEST_CASE("identity chain (2.9): |1-conj(w)z|^2 - |w-z|^2 = (1-|w|^2)(1-|z|^2)") {
  double worst = 0;
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      Complex w = std::polar(0.97 * i / 31.0, 2.1 * i);
      Complex z = std::polar(0.97 * j / 31.0, 1.3 * j + 0.4);
      double lhs = std::norm(1.0 - std::conj(w) * z) - std::norm(w - z);
      double rhs = (1.0 - std::norm(w)) * (1.0 - std::norm(z));
      worst = std::max(worst, std::abs(lhs - rhs));
      // the lower bound on the modulus gap, with the sharp denominator
      // |1-conj(w)z| + |w-z| <= (1+|w|)(1+|z|)
      double gap = std::abs(std::abs(1.0 - std::conj(w) * z) - std::abs(w - z));
      double denom = (1.0 + std::abs(w)) * (1.0 + std::abs(z));
      CHECK(gap >= rhs / denom - 1e-12);
    }
  CHECK(worst <= 1e-12);
}
