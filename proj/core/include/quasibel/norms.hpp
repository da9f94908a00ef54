#pragma once

#include <limits>
#include <span>

#include "quasibel/geometry.hpp"
#include "quasibel/grid.hpp"

namespace qbel {

constexpr double kInfExponent = std::numeric_limits<double>::infinity();

/// Weighted L^p_s / C^0_s norm spec: the norm of f(z) * dist(z, boundary)^s.
/// p = infinity selects the max-norm (C^0_s).
struct WeightedNormSpec {
  double p = 2.0;
  double s = 0.0;
  DomainGeometry geometry = DomainGeometry::plane();

  WeightedNormSpec() = default;
  WeightedNormSpec(double p_, double s_, DomainGeometry geom);
};

/// Deterministic pairwise (tree) reduction; bit-stable across thread counts.
double pairwise_sum(std::span<const double> xs);

/// (sum_i w_i |f_i d_i^s|^p)^(1/p), or max_i |f_i d_i^s| at p = infinity,
/// with d_i the boundary-distance weight of spec.geometry.
double weighted_norm(const SampledField& f, const WeightedNormSpec& spec);

/// Unweighted L^p norm with quadrature weights (s = 0, plane geometry).
double lp_norm(const SampledField& f, double p);

}  // namespace qbel
