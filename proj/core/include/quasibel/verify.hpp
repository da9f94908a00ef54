#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "quasibel/geometry.hpp"
#include "quasibel/grid.hpp"
#include "quasibel/transforms.hpp"

namespace qbel {

/// One estimate check: the measured values, the paper anchor it ties to (or
/// "plumbing"), and the verdict.
struct EstimateReport {
  std::string id;
  std::string anchor;
  std::map<std::string, double> measured;
  double tol = 0;
  bool pass = false;
  int n = 0;
  double seconds = 0;
};

/// Empirical lower bound for ||T||_p: max over seeded random smooth
/// compactly supported trial fields of ||Tf||_p / ||f||_p. Trials are
/// sub-seeded per index, so extending the trial count never changes the
/// earlier trials (the estimate can only grow).
double operator_norm_estimate(const OperatorSpec& spec, double p, int trials, std::uint64_t seed,
                              int n = 128);

struct DecayFit {
  double exponent = 0;
  double r_squared = 0;
  int rings = 0;
};

/// Least-squares slope of log(ring max |field|) against -log(dist) over
/// log-uniform rings within the band (in boundary-distance units).
/// Throws std::invalid_argument with fewer than 4 usable rings.
DecayFit decay_exponent_fit(const SampledField& field, const DomainGeometry& geometry,
                            std::pair<double, double> ring_band);

/// Interior sup of dbar(T f) - f via finite differences, normalized by
/// sup |f|.
double right_inverse_residual(const OperatorSpec& spec, const SampledField& field);

struct SuiteConfig {
  std::vector<std::string> checks;  // empty = none; {"all"} = full registry
  int n = 128;
  std::uint64_t seed = 7;
};

const std::vector<std::string>& registered_checks();

/// Runs each named check; throws std::invalid_argument on unknown names.
std::vector<EstimateReport> run_suite(const SuiteConfig& config);

/// JSON-lines emission; with include_timing = false the bodies are
/// byte-identical across runs for a fixed config and seed.
void write_reports_jsonl(std::ostream& os, const std::vector<EstimateReport>& reports,
                         bool include_timing = true);

}  // namespace qbel
