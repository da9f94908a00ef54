#pragma once

#include <string>

#include "quasibel/params.hpp"

namespace qbel {

/// Family spec files: a small expression language, each term
/// coef * z^a * conj(z)^b * t_1^{p_1}...t_dim^{p_dim} * bump(z),
/// with named bumps {one, cap, indicator}. Example:
/// {
///   "d": 0.4, "t_dim": 1, "box": {"lo": [0], "hi": [0.5]},
///   "terms": [{"coef": [0.3, 0], "z_pow": 0, "zbar_pow": 0, "t_pow": [1],
///              "bump": "cap", "center": [0, 0], "radius": 0.8}]
/// }
FamilySpec parse_family_json(const std::string& text);
FamilySpec load_family_file(const std::string& path);

}  // namespace qbel
