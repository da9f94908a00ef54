#pragma once

#include <iosfwd>

#include "quasibel/grid.hpp"

namespace qbel {

/// Deformed-lattice polylines: each source gridline mapped through the field,
/// emitted as CSV rows `row|col,<index>,re0,im0,re1,im1,...`. stride picks
/// every stride-th gridline.
void render_grid_csv(std::ostream& os, const SampledField& field, int stride = 8);

/// Portable graymap (ASCII P2) of |values|, linear or log scaled to 0..255.
void render_heat_pgm(std::ostream& os, const SampledField& field, bool log_scale = false);

}  // namespace qbel
