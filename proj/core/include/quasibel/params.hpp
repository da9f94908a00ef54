#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "quasibel/grid.hpp"
#include "quasibel/solver.hpp"

namespace qbel {

/// A parameter-dependent Beltrami family mu(z, t) over a box in R^dim
/// (dim <= 4), with certificates uniform in t.
struct FamilySpec {
  std::function<Complex(Complex, std::span<const double>)> rule;
  int t_dim = 1;
  std::vector<double> box_lo, box_hi;
  double d = 0;
  std::vector<std::pair<int, double>> growth;
  std::optional<std::pair<double, double>> param_growth;  // (N, C) of (1.5)

  void validate(std::uint64_t seed = 2) const;  // spot-checks sup |mu| <= d
};

/// The "cap" kernel schedule for parameter mollification. The z-dependent
/// radius is delta(z) = min(delta_max, [b (1-|z|)^{s+2m-1}]^{1/beta}); beta
/// and s stand in for the unquantified exponents of the Hoelder estimate and
/// are exposed with non-paper defaults.
struct MollifierSchedule {
  double b = 0.01;
  double beta = 0.25;
  double s = 2.0;
  double delta_max = 0.25;
  double t_spacing = 0.0;  // evaluation throws if delta(z) falls below this
  int quad_order = 12;
};

double mollifier_kernel_mass(int dim);  // of the normalized cap, = 1 by construction

struct HolderRow {
  Complex probe;
  double dt = 0;
  double diff = 0;
};

struct HolderResult {
  double beta_min = 0;      // min fitted slope over probes
  double r2_min = 0;        // worst fit quality
  bool saturated = false;   // all differences at solver-tolerance level
  bool low_r2 = false;      // some fit with R^2 < 0.9 (flag, not an error)
  std::vector<HolderRow> table;
  std::vector<double> beta_per_probe;
};

struct HolderOptions {
  int n = 64;               // lattice size for the normal solves
  int k = 0;                // derivative order, <= 2
  std::vector<double> dt_ladder;  // empty = 4 geometric rungs inside the box
  SolveOptions solve;
};

/// Solves the normal mapping at t and t + dt e_1 across the ladder and fits
/// the log-log slope of the derivative differences per probe.
HolderResult holder_modulus(const FamilySpec& family, const HolderOptions& opts,
                            const std::vector<Complex>& probes);

/// Convolves mu(z, .) against the cap at the z-dependent radius; returns the
/// t-smoothed family. The smoothed sup bound never exceeds the original d.
FamilySpec mollify_family(const FamilySpec& family, const MollifierSchedule& schedule,
                          int order_m);

}  // namespace qbel
