#include "quasibel/params.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qbel {

namespace {

constexpr double kPi = std::numbers::pi;

// Gauss-Legendre nodes/weights on [-1, 1]
void gauss_legendre(int q, std::vector<double>& x, std::vector<double>& w) {
  x.assign(q, 0);
  w.assign(q, 0);
  for (int i = 0; i < q; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 64; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < q; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      double dp = q * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = 0.0;
    for (int j = 0; j < q; ++j) {
      double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    double dp = q * (t * p0 - p1) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

double cap_profile(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

// tensor quadrature of the cap over [-1,1]^dim, weights normalized to unit
// discrete mass so constant-in-t families are reproduced exactly
struct CapQuadrature {
  std::vector<std::vector<double>> nodes;  // dim-vectors
  std::vector<double> weights;
};

CapQuadrature cap_quadrature(int dim, int order) {
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  CapQuadrature q;
  std::vector<int> idx(dim, 0);
  for (;;) {
    std::vector<double> pt(dim);
    double w = 1.0, r2 = 0;
    for (int d = 0; d < dim; ++d) {
      pt[d] = gx[idx[d]];
      w *= gw[idx[d]];
      r2 += pt[d] * pt[d];
    }
    double cw = w * cap_profile(r2);
    if (cw > 0) {
      q.nodes.push_back(std::move(pt));
      q.weights.push_back(cw);
    }
    int d = 0;
    while (d < dim && ++idx[d] == order) idx[d++] = 0;
    if (d == dim) break;
  }
  double mass = 0;
  for (double w : q.weights) mass += w;
  for (double& w : q.weights) w /= mass;
  return q;
}

}  // namespace

double mollifier_kernel_mass(int dim) {
  auto q = cap_quadrature(dim, 12);
  double mass = 0;
  for (double w : q.weights) mass += w;
  return mass;
}

void FamilySpec::validate(std::uint64_t seed) const {
  if (t_dim < 1 || t_dim > 4) throw std::invalid_argument("family parameter dimension must be 1..4");
  if (static_cast<int>(box_lo.size()) != t_dim || static_cast<int>(box_hi.size()) != t_dim)
    throw std::invalid_argument("family box dimensions mismatch");
  for (int i = 0; i < t_dim; ++i)
    if (!(box_hi[i] >= box_lo[i])) throw std::invalid_argument("family box is empty");
  if (!(d < 1.0)) throw std::invalid_argument("family requires d < 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    double r = std::sqrt(u01(rng)) * 0.999;
    Complex z = std::polar(r, 2 * kPi * u01(rng));
    std::vector<double> t(t_dim);
    for (int i = 0; i < t_dim; ++i) t[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * u01(rng);
    if (std::abs(rule(z, t)) > d * (1 + 1e-12))
      throw std::domain_error("family exceeds the certified sup bound at a spot check");
    // z-derivative growth certificates, uniform in t
    for (auto [k, bk] : growth) {
      if (1.0 - std::abs(z) < 1e-3) continue;
      double step = 0.02 * (1.0 - std::abs(z));
      auto ev = [&](Complex p) { return rule(p, t); };
      double worst = 0;
      if (k == 1) {
        Complex dx = (ev(z + step) - ev(z - step)) / (2 * step);
        Complex dy = (ev(z + Complex{0, step}) - ev(z - Complex{0, step})) / (2 * step);
        worst = std::max(std::abs(0.5 * (dx - Complex{0, 1} * dy)),
                         std::abs(0.5 * (dx + Complex{0, 1} * dy)));
      } else {
        Complex dxx = (ev(z + 2.0 * step) - 2.0 * ev(z) + ev(z - 2.0 * step)) / (4 * step * step);
        worst = std::abs(dxx);
      }
      if (worst > bk * std::pow(1.0 - std::abs(z), -static_cast<double>(k)) * 1.35 + 1e-9)
        throw std::domain_error("family growth certificate violated at a spot check");
    }
  }
}

HolderResult holder_modulus(const FamilySpec& family, const HolderOptions& opts,
                            const std::vector<Complex>& probes) {
  family.validate();
  if (opts.k < 0 || opts.k > 2)
    throw std::invalid_argument("holder_modulus: derivative order k <= 2");
  if (probes.empty()) throw std::invalid_argument("holder_modulus: no probes");

  std::vector<double> ladder = opts.dt_ladder;
  double span = family.box_hi[0] - family.box_lo[0];
  if (ladder.empty()) {
    double top = 0.5 * span;
    for (int r = 0; r < 4; ++r) ladder.push_back(top / (1 << r));
  }
  for (double dt : ladder)
    if (dt <= 0 || dt > span)
      throw std::invalid_argument("holder_modulus: ladder rung outside the box");
  std::sort(ladder.rbegin(), ladder.rend());

  auto grid = make_grid(GridKind::SquareLattice, opts.n, 1.25);

  auto solve_at = [&](double t1) {
    std::vector<double> t(family.box_lo);
    t[0] = family.box_lo[0] + t1;
    auto mu = BeltramiCoefficient::from_rule(
        [&family, t](Complex z) {
          return std::abs(z) < 1.0 ? family.rule(z, t) : Complex{0, 0};
        },
        grid, family.d);
    return normal_solution(mu, opts.solve);
  };

  auto derivative_field = [&](const QcMapping& map) {
    if (opts.k == 0) return map.f;
    if (opts.k == 1) return map.fz;
    return fd_dz(map.fz, 4);
  };

  auto base = solve_at(0.0);
  auto base_k = derivative_field(base);
  double solver_floor = std::max(base.diagnostics.residual, 1e-8);

  HolderResult out;
  std::vector<std::vector<double>> diffs(probes.size());
  for (double dt : ladder) {
    auto cur = solve_at(dt);
    auto cur_k = derivative_field(cur);
    for (std::size_t p = 0; p < probes.size(); ++p) {
      Complex dv = interp_bilinear(cur_k, probes[p]) - interp_bilinear(base_k, probes[p]);
      diffs[p].push_back(std::abs(dv));
      out.table.push_back({probes[p], dt, std::abs(dv)});
    }
  }

  double maxdiff = 0;
  for (const auto& row : diffs)
    for (double v : row) maxdiff = std::max(maxdiff, v);
  if (maxdiff <= 2.0 * solver_floor) {
    out.saturated = true;
    out.beta_min = 0;
    out.r2_min = 1;
    return out;
  }

  out.beta_min = std::numeric_limits<double>::infinity();
  out.r2_min = 1.0;
  for (std::size_t p = 0; p < probes.size(); ++p) {
    // least squares of log diff against log dt
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    int npts = 0;
    for (std::size_t r = 0; r < ladder.size(); ++r) {
      if (diffs[p][r] <= 0) continue;
      double x = std::log(ladder[r]), y = std::log(diffs[p][r]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      syy += y * y;
      ++npts;
    }
    if (npts < 3) continue;
    double det = npts * sxx - sx * sx;
    double slope = (npts * sxy - sx * sy) / det;
    double ybar = sy / npts;
    double ss_tot = syy - npts * ybar * ybar;
    double intercept = (sy - slope * sx) / npts;
    double ss_res = 0;
    for (std::size_t r = 0; r < ladder.size(); ++r) {
      if (diffs[p][r] <= 0) continue;
      double pred = intercept + slope * std::log(ladder[r]);
      double e = std::log(diffs[p][r]) - pred;
      ss_res += e * e;
    }
    double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    out.beta_per_probe.push_back(slope);
    out.beta_min = std::min(out.beta_min, slope);
    out.r2_min = std::min(out.r2_min, r2);
  }
  if (out.beta_per_probe.empty())
    throw std::runtime_error("holder_modulus: no probe produced a usable fit");
  out.low_r2 = out.r2_min < 0.9;
  return out;
}

FamilySpec mollify_family(const FamilySpec& family, const MollifierSchedule& schedule,
                          int order_m) {
  family.validate();
  if (order_m < 0) throw std::invalid_argument("mollify_family: order_m >= 0");
  if (schedule.quad_order < 4) throw std::invalid_argument("mollify_family: quad order too low");

  auto quad = std::make_shared<CapQuadrature>(cap_quadrature(family.t_dim, schedule.quad_order));
  double power = schedule.s + 2.0 * order_m - 1.0;
  auto base = family;  // copies rule, box, certificates

  FamilySpec out = family;
  MollifierSchedule sched = schedule;
  out.rule = [base, quad, sched, power](Complex z, std::span<const double> t) {
    double gap = std::max(0.0, 1.0 - std::abs(z));
    double delta = std::min(sched.delta_max, std::pow(sched.b * std::pow(gap, power),
                                                      1.0 / sched.beta));
    if (delta < sched.t_spacing)
      throw std::domain_error("mollify_family: radius rule collapsed below the t spacing");
    Complex acc{0, 0};
    std::vector<double> ts(t.begin(), t.end());
    for (std::size_t qn = 0; qn < quad->nodes.size(); ++qn) {
      for (int d = 0; d < base.t_dim; ++d) ts[d] = t[d] - delta * quad->nodes[qn][d];
      acc += quad->weights[qn] * base.rule(z, ts);
    }
    return acc;
  };
  // convex averaging cannot increase the certified bound
  out.d = family.d;
  return out;
}

}  // namespace qbel
