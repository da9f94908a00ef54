#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace qbel {

using Complex = std::complex<double>;

enum class GridKind { SquareLattice, PolarDisk, StripPeriodic };

/// Sampled lattice over a region of the plane with per-node quadrature weights.
///
/// Square lattices are cell-centered over [-extent, extent]^2 so that no node
/// falls exactly on the unit circle (the boundary weights (1-|z|)^s vanish or
/// blow up there). Strip grids cover phi in [-pi, pi) with exact wraparound
/// and a cell-centered xi range [xi_lo, xi_hi].
class ComplexGrid {
 public:
  GridKind kind;
  int n = 0;           // points per axis
  double extent = 0;   // half-width of the box, or disk radius
  double xi_lo = 0;    // strip only
  double xi_hi = 0;    // strip only
  double hx = 0;       // node spacing along x (xi for strips)
  double hy = 0;       // node spacing along y (phi for strips)

  std::vector<Complex> nodes;   // deterministic order, see make_grid
  std::vector<double> weights;  // area element per node

  std::size_t size() const { return nodes.size(); }
  double spacing() const { return hx > hy ? hx : hy; }

  // Square/strip lattices are indexed row-major: index = iy * n + ix.
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(n) + ix;
  }

  bool same_layout(const ComplexGrid& other) const;
};

using GridPtr = std::shared_ptr<const ComplexGrid>;

/// Complex values attached to a grid; the carrier of mu, f, sigma and kernels.
struct SampledField {
  GridPtr grid;
  std::vector<Complex> values;
  std::string label;

  SampledField() = default;
  SampledField(GridPtr g, std::string lab = {});

  std::size_t size() const { return values.size(); }
  Complex& operator[](std::size_t i) { return values[i]; }
  const Complex& operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;
};

/// Builds a grid. kind/n/extent per GridKind:
///  - SquareLattice: n a power of two >= 8; cell-centered n x n nodes over
///    [-extent, extent]^2, weight h^2.
///  - PolarDisk: n radii (midpoint rule) x n angles over the disk of radius
///    extent, weight r * dr * dtheta.
///  - StripPeriodic: n x n nodes; phi_j = -pi + j * 2pi/n, xi cell-centered
///    over [xi_lo, xi_hi] (pass via the two-argument extent overload).
/// Throws std::invalid_argument on violated preconditions.
GridPtr make_grid(GridKind kind, int n, double extent);
GridPtr make_grid_strip(int n, double xi_lo, double xi_hi);

/// Evaluates rule at every node. Throws std::domain_error if any value is
/// non-finite.
SampledField sample(const std::function<Complex(Complex)>& rule, const GridPtr& grid);

/// Zeroes all values at nodes with |z| >= radius (disk-supported fields live
/// on square lattices with indicator masking).
void mask_outside_disk(SampledField& f, double radius = 1.0);

// Pointwise arithmetic; grids must match.
SampledField operator+(const SampledField& a, const SampledField& b);
SampledField operator-(const SampledField& a, const SampledField& b);
SampledField operator*(const SampledField& a, const SampledField& b);
SampledField operator*(Complex c, const SampledField& a);

}  // namespace qbel
