#include "quasibel/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace qbel {

namespace {
void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}
}  // namespace

void render_grid_csv(std::ostream& os, const SampledField& field, int stride) {
  const auto& g = *field.grid;
  if (g.kind != GridKind::SquareLattice && g.kind != GridKind::StripPeriodic)
    throw std::invalid_argument("render_grid_csv: lattice fields only");
  if (stride < 1) stride = 1;
  std::string line;
  for (int iy = 0; iy < g.n; iy += stride) {
    line = "row," + std::to_string(iy);
    for (int ix = 0; ix < g.n; ++ix) {
      Complex v = field.values[g.index(ix, iy)];
      line += ',';
      append_double(line, v.real());
      line += ',';
      append_double(line, v.imag());
    }
    os << line << "\n";
  }
  for (int ix = 0; ix < g.n; ix += stride) {
    line = "col," + std::to_string(ix);
    for (int iy = 0; iy < g.n; ++iy) {
      Complex v = field.values[g.index(ix, iy)];
      line += ',';
      append_double(line, v.real());
      line += ',';
      append_double(line, v.imag());
    }
    os << line << "\n";
  }
}

void render_heat_pgm(std::ostream& os, const SampledField& field, bool log_scale) {
  const auto& g = *field.grid;
  if (g.kind != GridKind::SquareLattice && g.kind != GridKind::StripPeriodic)
    throw std::invalid_argument("render_heat_pgm: lattice fields only");
  double vmax = 0;
  for (const auto& v : field.values) vmax = std::max(vmax, std::abs(v));
  os << "P2\n" << g.n << " " << g.n << "\n255\n";
  const double floor_ratio = 1e-6;
  for (int iy = g.n - 1; iy >= 0; --iy) {  // top row first
    for (int ix = 0; ix < g.n; ++ix) {
      double a = std::abs(field.values[g.index(ix, iy)]);
      int pix = 0;
      if (vmax > 0 && a > 0) {
        double t = log_scale
                       ? std::max(0.0, 1.0 + std::log10(std::max(a / vmax, floor_ratio)) / 6.0)
                       : a / vmax;
        pix = static_cast<int>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
      }
      os << pix << (ix + 1 < g.n ? ' ' : '\n');
    }
  }
}

}  // namespace qbel
