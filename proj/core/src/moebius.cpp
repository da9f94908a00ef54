#include "quasibel/moebius.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace qbel {

DiskAutomorphism::DiskAutomorphism(Complex w_) : w(w_) {
  if (std::abs(w) >= 1.0)
    throw std::invalid_argument("disk automorphism requires |w| < 1");
}

Complex apply_moebius(const DiskAutomorphism& aut, Complex z) {
  Complex den = 1.0 - z * std::conj(aut.w);
  assert(std::abs(den) > 0.0 && "degenerate denominator, impossible for |z|<=1, |w|<1");
  return (aut.w - z) / den;
}

AffineEllipseMap::AffineEllipseMap(Complex mu0_) : mu0(mu0_) {
  if (std::abs(mu0) >= 1.0)
    throw std::invalid_argument("affine ellipse map requires |mu0| < 1");
}

Complex affine_forward(const AffineEllipseMap& map, Complex z) {
  return z + map.mu0 * std::conj(z);
}

Complex affine_inverse(const AffineEllipseMap& map, Complex z) {
  return (z - map.mu0 * std::conj(z)) / (1.0 - std::norm(map.mu0));
}

ReflectionRule ReflectionRule::disk_inversion() {
  ReflectionRule r;
  r.geometry = DomainGeometry::disk();
  r.mode = ReflectionMode::DiskInversion;
  return r;
}

ReflectionRule ReflectionRule::pullback(DomainGeometry geom,
                                        std::function<Complex(Complex)> forward,
                                        std::function<Complex(Complex)> inverse) {
  if (!forward || !inverse)
    throw std::invalid_argument("pullback reflection requires an invertible map");
  ReflectionRule r;
  r.geometry = std::move(geom);
  r.mode = ReflectionMode::PullbackThroughMap;
  r.map_forward = std::move(forward);
  r.map_inverse = std::move(inverse);
  return r;
}

// First-order radial extrapolation of g across the unit circle, exact on
// linear maps (in particular the identity, so pullback reflection through the
// identity chart reduces to plain disk inversion). Anchors sit at radii 1/rho
// and 2/rho - 1; beyond rho = 1.8 the ray continues by radial scaling, which
// only enters the counter-term kernels through ratios that tend to 1 there.
Complex exterior_extension(const std::function<Complex(Complex)>& g, Complex zeta) {
  double rho = std::abs(zeta);
  if (rho <= 1.0) return g(zeta);
  Complex u = zeta / rho;
  double rc = std::min(rho, 1.8);
  Complex g1 = g((1.0 / rc) * u);
  Complex g2 = g((2.0 / rc - 1.0) * u);
  Complex val = (rc + 2.0) * g1 - (rc + 1.0) * g2;
  if (rho > rc) val *= rho / rc;
  return val;
}

Complex reflect(const ReflectionRule& rule, Complex w) {
  if (rule.mode == ReflectionMode::DiskInversion) {
    if (std::abs(w) >= 1.0)
      throw std::domain_error("reflect: point not strictly inside the disk");
    return 1.0 / std::conj(w);
  }
  Complex z = rule.map_inverse(w);
  if (std::abs(z) >= 1.0)
    throw std::domain_error("reflect: point not strictly inside the domain");
  return exterior_extension(rule.map_forward, 1.0 / std::conj(z));
}

}  // namespace qbel
