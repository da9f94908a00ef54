#include "quasibel/geometry.hpp"

#include <cmath>

namespace qbel {

DomainGeometry DomainGeometry::plane() {
  DomainGeometry g;
  g.kind = GeometryKind::Plane;
  g.boundary_distance = [](Complex) { return 1.0; };
  return g;
}

DomainGeometry DomainGeometry::disk() {
  DomainGeometry g;
  g.kind = GeometryKind::Disk;
  g.boundary_distance = [](Complex z) { return std::max(0.0, 1.0 - std::abs(z)); };
  g.reflection = [](Complex z) {
    double r = std::abs(z);
    if (r >= 1.0 || r == 0.0)
      throw std::domain_error("reflection needs a point strictly inside the disk");
    return 1.0 / std::conj(z);
  };
  return g;
}

DomainGeometry DomainGeometry::strip() {
  DomainGeometry g;
  g.kind = GeometryKind::StripPeriodic;
  g.boundary_distance = [](Complex) { return 1.0; };
  return g;
}

DomainGeometry DomainGeometry::quasidisk(std::function<double(Complex)> dist,
                                         std::function<Complex(Complex)> refl) {
  DomainGeometry g;
  g.kind = GeometryKind::Quasidisk;
  g.boundary_distance = std::move(dist);
  g.reflection = std::move(refl);
  return g;
}

}  // namespace qbel
