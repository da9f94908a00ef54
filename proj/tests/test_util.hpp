#pragma once

#include <cmath>
#include <complex>

#include "quasibel/grid.hpp"
#include "quasibel/norms.hpp"

namespace qbel::testutil {

// Smooth compactly supported cap and its Wirtinger derivatives; w is the
// support radius around c.
inline Complex cap(Complex z, Complex c = {0, 0}, double w = 0.5) {
  double s = std::norm((z - c) / w);
  if (s >= 1.0) return {0, 0};
  return {std::exp(-1.0 / (1.0 - s)), 0};
}

inline Complex cap_dzbar(Complex z, Complex c = {0, 0}, double w = 0.5) {
  Complex u = (z - c) / w;
  double s = std::norm(u);
  if (s >= 1.0) return {0, 0};
  double v = std::exp(-1.0 / (1.0 - s));
  double g = 1.0 - s;
  return -(v / (g * g)) * u / w;
}

inline Complex cap_dz(Complex z, Complex c = {0, 0}, double w = 0.5) {
  Complex u = (z - c) / w;
  double s = std::norm(u);
  if (s >= 1.0) return {0, 0};
  double v = std::exp(-1.0 / (1.0 - s));
  double g = 1.0 - s;
  return -(v / (g * g)) * std::conj(u) / w;
}

inline double rel_l2(const SampledField& a, const SampledField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double l2(const SampledField& a) { return lp_norm(a, 2.0); }

}  // namespace qbel::testutil
