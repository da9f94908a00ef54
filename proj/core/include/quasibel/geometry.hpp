#pragma once

#include <functional>
#include <memory>
#include <stdexcept>

#include "quasibel/grid.hpp"

namespace qbel {

enum class GeometryKind { Plane, Disk, StripPeriodic, Quasidisk };

/// One of {plane, unit disk, periodic strip, quasidisk}, with boundary-distance
/// and reflection-point functions. Quasidisk geometries are produced by the
/// solver from a parameterizing map of D onto Omega; boundary distance is then
/// measured against a sampled boundary polyline.
class DomainGeometry {
 public:
  GeometryKind kind = GeometryKind::Plane;

  // Distance to the domain boundary; plane and strip geometries have no
  // finite boundary and return 1 (unit weight in Definition-1 style norms).
  std::function<double(Complex)> boundary_distance;

  // Reflection across the boundary; only disk and quasidisk define it.
  std::function<Complex(Complex)> reflection;

  static DomainGeometry plane();
  static DomainGeometry disk();
  static DomainGeometry strip();
  // hooks supplied by the solver layer
  static DomainGeometry quasidisk(std::function<double(Complex)> dist,
                                  std::function<Complex(Complex)> refl);

  double dist(Complex z) const { return boundary_distance(z); }
  Complex reflect_point(Complex z) const {
    if (!reflection) throw std::logic_error("geometry has no reflection");
    return reflection(z);
  }
};

}  // namespace qbel
