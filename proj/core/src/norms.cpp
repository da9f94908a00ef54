#include "quasibel/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace qbel {

WeightedNormSpec::WeightedNormSpec(double p_, double s_, DomainGeometry geom)
    : p(p_), s(s_), geometry(std::move(geom)) {
  if (p < 1.0) throw std::invalid_argument("norm exponent p must be >= 1");
  if (s < 0.0) throw std::invalid_argument("weight power s must be >= 0");
}

double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

double weighted_norm(const SampledField& f, const WeightedNormSpec& spec) {
  const auto& grid = *f.grid;
  const bool weightless = spec.s == 0.0;
  if (spec.p == kInfExponent) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      double d = weightless ? 1.0 : std::pow(spec.geometry.dist(grid.nodes[i]), spec.s);
      double v = std::abs(f.values[i]) * d;
      if (v > m) m = v;
    }
    return m;
  }
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double d = weightless ? 1.0 : std::pow(spec.geometry.dist(grid.nodes[i]), spec.s);
    terms[i] = grid.weights[i] * std::pow(std::abs(f.values[i]) * d, spec.p);
  }
  return std::pow(pairwise_sum(terms), 1.0 / spec.p);
}

double lp_norm(const SampledField& f, double p) {
  return weighted_norm(f, WeightedNormSpec(p, 0.0, DomainGeometry::plane()));
}

}  // namespace qbel
