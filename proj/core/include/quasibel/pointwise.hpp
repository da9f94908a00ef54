#pragma once

#include <vector>

#include "quasibel/grid.hpp"

namespace qbel {

/// Off-grid evaluation of the Cauchy transform of a gridded density:
///   sigma(w) = (1/pi) sum_j g_j Int_{cell_j} dA / (w - tau).
/// Cells near w use exact Gauss-Legendre cell integrals, far cells the point
/// kernel, and |w| beyond the support circle switches to the truncated
/// exterior Laurent series sigma(w) = sum_k c_k / w^{k+1}.
class CauchyEvaluator {
 public:
  explicit CauchyEvaluator(const SampledField& density, int laurent_terms = 160);

  Complex value(Complex w) const;

  /// d sigma / dw. Only meaningful where sigma is holomorphic, i.e. outside
  /// the support of the density.
  Complex derivative(Complex w) const;

 private:
  Complex direct_value(Complex w) const;
  Complex direct_derivative(Complex w) const;

  std::vector<Complex> pts_;   // support nodes
  std::vector<Complex> q_;     // density * cell area
  std::vector<Complex> laurent_;
  double h_ = 0;
  double support_radius_ = 0;
  double laurent_switch_ = 0;
};

}  // namespace qbel
