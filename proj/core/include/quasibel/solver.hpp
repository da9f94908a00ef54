#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "quasibel/geometry.hpp"
#include "quasibel/grid.hpp"
#include "quasibel/moebius.hpp"
#include "quasibel/transforms.hpp"

namespace qbel {

/// A Beltrami coefficient with a certified sup bound d < 1 and optional
/// boundary-growth certificates |mu_(k)| <= b_k (1-|z|)^{-k}.
struct BeltramiCoefficient {
  SampledField field;
  std::function<Complex(Complex)> rule;  // optional closed form
  double d = 0;
  std::vector<std::pair<int, double>> growth;          // (k, b_k)
  std::optional<std::pair<double, double>> param_growth;  // (N, C) of the t-estimates

  static BeltramiCoefficient from_field(SampledField f, double d);
  static BeltramiCoefficient from_rule(const std::function<Complex(Complex)>& rule,
                                       const GridPtr& grid, double d);

  /// Finite-difference spot checks of the growth certificates at 100 seeded
  /// random interior nodes; throws std::domain_error on violation.
  void verify_certificates(std::uint64_t seed = 1) const;

  Complex eval(Complex z) const;  // rule if present, else bilinear interpolation
};

struct SolveOptions {
  double p = 2.0;              // norm exponent for the Neumann diagnostics
  double series_tol = 1e-10;   // stop when the increment norm falls below tol * ||input||
  int max_iter = 400;
  double residual_tol = 1e-3;
  bool exponential = false;    // principal solution in the F = z + C(mu e^sigma) form
};

enum class MappingKind { Principal, Normal, LogPrincipal, Reconstructed };

struct SolveDiagnostics {
  int iterations = 0;
  double contraction = 0;        // measured Neumann increment ratio
  double residual = 0;           // ||f_zbar - mu f_z||_2 / ||f_z||_2, interior mask
  double residual_fd = 0;        // same, with independent finite differences
  double sup_deviation = 0;      // log solutions: sup |f(zeta) - zeta|
  double path_discrepancy = 0;   // reconstruct_map: two-path max difference
};

/// A solved mapping with first derivatives and solve diagnostics.
struct QcMapping {
  SampledField f, fz, fzbar;
  MappingKind kind = MappingKind::Principal;
  SolveDiagnostics diagnostics;
};

/// Levels f_1..f_k of the derivative chain with per-level residuals and
/// boundary-decay fits.
struct DerivativeChain {
  std::vector<SampledField> levels;       // f_j, 1-based index j = position + 1
  std::vector<double> residuals;          // weighted interior residual per level
  std::vector<double> decay_exponents;    // fitted alpha_j of |f_j| ~ dist^{-alpha}
  SampledField mu_w;                      // first mu derivative, reused by reconstruct_map
  int m = 0;
  double contraction = 0;
  int iterations = 0;
};

/// sigma with sigma_zbar = mu sigma_z + phi, sigma = O(1/z), via the Neumann
/// series C (Id - mu S)^{-1} phi. Throws on non-convergence, reporting the
/// measured contraction ratio.
SampledField solve_inhomogeneous(const BeltramiCoefficient& mu, const SampledField& phi,
                                 const SolveOptions& opts = {});

/// Principal solution f(z) = z + C (Id - mu S)^{-1} mu, normalized by
/// f(z) = z + O(1/z) at infinity.
QcMapping principal_solution(const BeltramiCoefficient& mu, const SolveOptions& opts = {});

/// Normal solution: the mu-quasiconformal self-map of D fixing 0 and 1,
/// built by reflecting the principal solution across the circle and solving
/// for the symmetrized coefficient.
QcMapping normal_solution(const BeltramiCoefficient& mu, const SolveOptions& opts = {});

/// Principal logarithmic solution on the strip:
/// f_nu(zeta) = zeta + P_H [nu (Id - T_H nu)^{-1} (1)].
QcMapping principal_log_solution(const BeltramiCoefficient& nu, const SolveOptions& opts = {});

struct ChainOptions {
  SolveOptions solve;
  double b_threshold = 0.05;
};

/// Solves the derivative-chain system: level-1 equation
/// (f_1)_zbar = mu (f_1)_w + mu_w f_1 + mu_ww and its higher analogues, by
/// the P_m (Id - mu T_m)^{-1} iteration.
DerivativeChain derivative_chain_solve(const BeltramiCoefficient& mu,
                                       const DomainGeometry& geometry, const ReflectionRule& rule,
                                       int k, int m, const ChainOptions& opts = {});

/// Reconstructs the mapping F from chain level 1:
/// g = Int f_1 ds + (mu f_1 + mu_w) ds_bar, F = Int e^g ds + mu e^g ds_bar,
/// with two independent staircase paths per node.
QcMapping reconstruct_map(const DerivativeChain& chain, const BeltramiCoefficient& mu,
                          const DomainGeometry& geometry, const SolveOptions& opts = {});

/// sup over interior nodes of |h''/h'| * dist(z, boundary); values below 1
/// certify the univalence criterion. Throws std::domain_error when |h'|
/// degenerates at a node.
double univalence_margin(const SampledField& h, const DomainGeometry& geometry);
double univalence_margin(const QcMapping& mapping, const DomainGeometry& geometry);

/// Quasidisk geometry carved out by a solved mapping of D: boundary polyline
/// distance and pullback reflection through the map.
struct QuasidiskDomain {
  DomainGeometry geometry;
  ReflectionRule rule;
};
QuasidiskDomain make_quasidisk(const QcMapping& map_on_disk);

/// Bilinear interpolation of a square-lattice field.
Complex interp_bilinear(const SampledField& f, Complex w);

}  // namespace qbel
