#include "quasibel/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qbel {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

GridPtr make_square(int n, double extent) {
  if (!power_of_two(n))
    throw std::invalid_argument("square lattice requires power-of-two n");
  auto g = std::make_shared<ComplexGrid>();
  g->kind = GridKind::SquareLattice;
  g->n = n;
  g->extent = extent;
  g->hx = g->hy = 2.0 * extent / n;
  g->nodes.reserve(static_cast<std::size_t>(n) * n);
  g->weights.assign(static_cast<std::size_t>(n) * n, g->hx * g->hy);
  for (int iy = 0; iy < n; ++iy) {
    double y = -extent + (iy + 0.5) * g->hy;
    for (int ix = 0; ix < n; ++ix) {
      double x = -extent + (ix + 0.5) * g->hx;
      g->nodes.emplace_back(x, y);
    }
  }
  return g;
}

GridPtr make_polar(int n, double radius) {
  auto g = std::make_shared<ComplexGrid>();
  g->kind = GridKind::PolarDisk;
  g->n = n;
  g->extent = radius;
  double dr = radius / n;
  double dth = 2.0 * std::numbers::pi / n;
  g->hx = dr;
  g->hy = dth;
  g->nodes.reserve(static_cast<std::size_t>(n) * n);
  g->weights.reserve(static_cast<std::size_t>(n) * n);
  // radius-major: all angles of ring 0, then ring 1, ...
  for (int ir = 0; ir < n; ++ir) {
    double r = (ir + 0.5) * dr;
    for (int it = 0; it < n; ++it) {
      double th = it * dth;
      g->nodes.emplace_back(r * std::cos(th), r * std::sin(th));
      g->weights.push_back(r * dr * dth);
    }
  }
  return g;
}

}  // namespace

bool ComplexGrid::same_layout(const ComplexGrid& other) const {
  return kind == other.kind && n == other.n && extent == other.extent &&
         xi_lo == other.xi_lo && xi_hi == other.xi_hi;
}

GridPtr make_grid(GridKind kind, int n, double extent) {
  if (n < 8) throw std::invalid_argument("grid requires n >= 8");
  if (!(extent > 0)) throw std::invalid_argument("grid extent must be positive");
  switch (kind) {
    case GridKind::SquareLattice:
      return make_square(n, extent);
    case GridKind::PolarDisk:
      return make_polar(n, extent);
    case GridKind::StripPeriodic:
      throw std::invalid_argument("strip grids take a xi range, use make_grid_strip");
  }
  throw std::invalid_argument("unknown grid kind");
}

GridPtr make_grid_strip(int n, double xi_lo, double xi_hi) {
  if (n < 8) throw std::invalid_argument("grid requires n >= 8");
  if (!(xi_hi > xi_lo)) throw std::invalid_argument("strip needs xi_hi > xi_lo");
  auto g = std::make_shared<ComplexGrid>();
  g->kind = GridKind::StripPeriodic;
  g->n = n;
  g->extent = 0.5 * (xi_hi - xi_lo);
  g->xi_lo = xi_lo;
  g->xi_hi = xi_hi;
  g->hx = (xi_hi - xi_lo) / n;
  g->hy = 2.0 * std::numbers::pi / n;
  g->nodes.reserve(static_cast<std::size_t>(n) * n);
  g->weights.assign(static_cast<std::size_t>(n) * n, g->hx * g->hy);
  // phi = pi excluded: nodes at -pi + j * 2pi/n, j = 0..n-1
  for (int ip = 0; ip < n; ++ip) {
    double phi = -std::numbers::pi + ip * g->hy;
    for (int ix = 0; ix < n; ++ix) {
      double xi = xi_lo + (ix + 0.5) * g->hx;
      g->nodes.emplace_back(xi, phi);
    }
  }
  return g;
}

SampledField::SampledField(GridPtr g, std::string lab)
    : grid(std::move(g)), values(grid ? grid->size() : 0, Complex{0, 0}), label(std::move(lab)) {}

bool SampledField::all_finite() const {
  for (const auto& v : values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
  return true;
}

SampledField sample(const std::function<Complex(Complex)>& rule, const GridPtr& grid) {
  if (grid->kind == GridKind::StripPeriodic) {
    // the rule must wrap around: values at phi = -pi and phi = pi coincide
    for (int ix = 0; ix < grid->n; ++ix) {
      double xi = grid->xi_lo + (ix + 0.5) * grid->hx;
      Complex lo = rule(Complex{xi, -std::numbers::pi});
      Complex hi = rule(Complex{xi, std::numbers::pi});
      if (std::abs(lo - hi) > 1e-10)
        throw std::domain_error("sample: rule is not phi-periodic on the strip");
    }
  }
  SampledField f(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    Complex v = rule(grid->nodes[i]);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::domain_error("sample: rule produced a non-finite value");
    f.values[i] = v;
  }
  return f;
}

void mask_outside_disk(SampledField& f, double radius) {
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f.grid->nodes[i]) >= radius) f.values[i] = Complex{0, 0};
}

namespace {
void require_same_grid(const SampledField& a, const SampledField& b) {
  if (!a.grid || !b.grid || !a.grid->same_layout(*b.grid))
    throw std::invalid_argument("field arithmetic requires matching grids");
}
}  // namespace

SampledField operator+(const SampledField& a, const SampledField& b) {
  require_same_grid(a, b);
  SampledField r(a.grid, a.label);
  for (std::size_t i = 0; i < a.size(); ++i) r.values[i] = a.values[i] + b.values[i];
  return r;
}

SampledField operator-(const SampledField& a, const SampledField& b) {
  require_same_grid(a, b);
  SampledField r(a.grid, a.label);
  for (std::size_t i = 0; i < a.size(); ++i) r.values[i] = a.values[i] - b.values[i];
  return r;
}

SampledField operator*(const SampledField& a, const SampledField& b) {
  require_same_grid(a, b);
  SampledField r(a.grid, a.label);
  for (std::size_t i = 0; i < a.size(); ++i) r.values[i] = a.values[i] * b.values[i];
  return r;
}

SampledField operator*(Complex c, const SampledField& a) {
  SampledField r(a.grid, a.label);
  for (std::size_t i = 0; i < a.size(); ++i) r.values[i] = c * a.values[i];
  return r;
}

}  // namespace qbel
