#pragma once

#include <functional>

#include "quasibel/geometry.hpp"
#include "quasibel/grid.hpp"

namespace qbel {

/// phi_w(z) = (w - z) / (1 - z conj(w)): maps D onto D and w to 0.
/// The map is its own inverse.
struct DiskAutomorphism {
  Complex w;
  explicit DiskAutomorphism(Complex w_);
};

Complex apply_moebius(const DiskAutomorphism& aut, Complex z);

/// g(z) = z + mu0 conj(z), mapping D onto an ellipse; |mu0| < 1.
struct AffineEllipseMap {
  Complex mu0;
  explicit AffineEllipseMap(Complex mu0_);
};

Complex affine_forward(const AffineEllipseMap& map, Complex z);
Complex affine_inverse(const AffineEllipseMap& map, Complex z);

enum class ReflectionMode { DiskInversion, PullbackThroughMap };

/// Reflection across a domain boundary. Disk inversion gives 1/conj(w).
/// Pullback mode reflects through a parameterizing map g of D onto Omega:
/// w_hat = g_ext(1 / conj(g^{-1}(w))), with g_ext the first-order exterior
/// extension g_ext(zeta) = 2 g(zeta') - g(zeta' (2 - |zeta'|^2)) at
/// zeta' = 1/conj(zeta).
struct ReflectionRule {
  DomainGeometry geometry;
  ReflectionMode mode = ReflectionMode::DiskInversion;

  // pullback mode: forward map, derivative-aware inverse, both defined on D
  std::function<Complex(Complex)> map_forward;
  std::function<Complex(Complex)> map_inverse;

  static ReflectionRule disk_inversion();
  static ReflectionRule pullback(DomainGeometry geom,
                                 std::function<Complex(Complex)> forward,
                                 std::function<Complex(Complex)> inverse);
};

/// Reflected point of w; throws std::domain_error when w is on or outside
/// the boundary.
Complex reflect(const ReflectionRule& rule, Complex w);

/// g_ext as used by pullback reflection; zeta must satisfy |zeta| > 1.
Complex exterior_extension(const std::function<Complex(Complex)>& g, Complex zeta);

}  // namespace qbel
