#include "quasibel/pointwise.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quasibel/transforms.hpp"

namespace qbel {

namespace {
constexpr double kPi = std::numbers::pi;

// 16-point Gauss-Legendre on [0, 1]
struct GL16 {
  std::array<double, 16> x{}, w{};
  GL16() {
    constexpr int Q = 16;
    for (int i = 0; i < Q; ++i) {
      double t = std::cos(kPi * (i + 0.75) / (Q + 0.5));
      for (int it = 0; it < 64; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < Q; ++j) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
        }
        double dp = Q * (t * p0 - p1) / (t * t - 1.0);
        double dt = p0 / dp;
        t -= dt;
        if (std::abs(dt) < 1e-15) break;
      }
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < Q; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      double dp = Q * (t * p0 - p1) / (t * t - 1.0);
      x[i] = 0.5 * (t + 1.0);
      w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
  }
};
const GL16 gl16;

// Exact-in-x integral of 1/(d - tau) over the square cell of side h centered
// at the origin, robust for d inside the cell: the x-integration is analytic,
//   Int dx / (d - x - iy) = log(d + a - iy) - log(d - a - iy),  a = h/2,
// and the remaining y-integral is split at the singular line y = Im(d) when
// it crosses the cell, where the integrand jumps by 2 pi i and carries an
// integrable log endpoint.
Complex cell_cauchy_integral(Complex d, double h) {
  double a = 0.5 * h;
  Complex c1 = d + a, c2 = d - a;
  auto integrand = [&](double y) {
    return std::log(c1 - Complex{0, y}) - std::log(c2 - Complex{0, y});
  };
  auto gl_piece = [&](double lo, double hi) {
    Complex acc{0, 0};
    for (int i = 0; i < 16; ++i) acc += gl16.w[i] * integrand(lo + (hi - lo) * gl16.x[i]);
    return acc * (hi - lo);
  };
  bool split = std::abs(d.imag()) < a && std::abs(d.real()) < a;
  if (split) return gl_piece(-a, d.imag()) + gl_piece(d.imag(), a);
  return gl_piece(-a, a);
}
}  // namespace

CauchyEvaluator::CauchyEvaluator(const SampledField& density, int laurent_terms) {
  if (!density.grid || density.grid->kind != GridKind::SquareLattice)
    throw std::invalid_argument("CauchyEvaluator needs a square-lattice density");
  const auto& g = *density.grid;
  h_ = g.hx;
  double area = h_ * h_;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (density.values[i] == Complex{0, 0}) continue;
    pts_.push_back(g.nodes[i]);
    q_.push_back(density.values[i] * area);
    support_radius_ = std::max(support_radius_, std::abs(g.nodes[i]));
  }
  support_radius_ += h_;
  laurent_switch_ = std::max(1.25 * support_radius_, support_radius_ + 0.25);
  laurent_.assign(laurent_terms, Complex{0, 0});
  // c_k = (1/pi) sum q_j tau_j^k
  for (std::size_t j = 0; j < pts_.size(); ++j) {
    Complex p{1.0, 0.0};
    for (int k = 0; k < laurent_terms; ++k) {
      laurent_[k] += q_[j] * p / kPi;
      p *= pts_[j];
    }
  }
}

Complex CauchyEvaluator::direct_value(Complex w) const {
  Complex acc{0, 0};
  double near = 3.0 * h_;
  double h2 = h_ * h_;
  for (std::size_t j = 0; j < pts_.size(); ++j) {
    Complex d = w - pts_[j];
    if (std::abs(d) > near)
      acc += q_[j] / (kPi * d);
    else
      acc += q_[j] * cell_cauchy_integral(d, h_) / (kPi * h2);
  }
  return acc;
}

Complex CauchyEvaluator::direct_derivative(Complex w) const {
  // cells closer than a fraction of the spacing are skipped: their principal
  // value nearly cancels over the centered cell, and evaluation points this
  // deep only occur within one cell of the support edge
  Complex acc{0, 0};
  for (std::size_t j = 0; j < pts_.size(); ++j) {
    Complex d = w - pts_[j];
    if (std::abs(d) < 0.6 * h_) continue;
    acc += -q_[j] / (kPi * d * d);
  }
  return acc;
}

Complex CauchyEvaluator::value(Complex w) const {
  if (pts_.empty()) return {0, 0};
  if (std::abs(w) >= laurent_switch_) {
    Complex iw = 1.0 / w;
    Complex acc{0, 0};
    for (std::size_t k = laurent_.size(); k-- > 0;) acc = (acc + laurent_[k]) * iw;
    return acc;
  }
  return direct_value(w);
}

Complex CauchyEvaluator::derivative(Complex w) const {
  if (pts_.empty()) return {0, 0};
  if (std::abs(w) >= laurent_switch_) {
    // d/dw sum c_k w^{-k-1} = sum -(k+1) c_k w^{-k-2}
    Complex iw = 1.0 / w;
    Complex acc{0, 0};
    for (std::size_t k = laurent_.size(); k-- > 0;)
      acc = (acc - static_cast<double>(k + 1) * laurent_[k]) * iw;
    return acc * iw;
  }
  return direct_derivative(w);
}

}  // namespace qbel
