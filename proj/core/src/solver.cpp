#include "quasibel/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "quasibel/fft.hpp"
#include "quasibel/norms.hpp"
#include "quasibel/pointwise.hpp"
#include "quasibel/verify.hpp"

namespace qbel {

namespace {

constexpr double kPi = std::numbers::pi;

void require_square_grid(const SampledField& f, const char* who) {
  if (!f.grid || f.grid->kind != GridKind::SquareLattice)
    throw std::invalid_argument(std::string(who) + ": requires a square-lattice field");
}

double max_abs(const SampledField& f) {
  double m = 0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

struct NeumannResult {
  SampledField density;
  int iterations = 0;
  double ratio = 0;
};

// density g = (Id - mu S)^{-1} phi by geometric iteration; throws with the
// measured contraction ratio when the increments do not shrink
NeumannResult neumann_density(const BeltramiCoefficient& mu, const SampledField& phi,
                              const SolveOptions& opts) {
  NeumannResult out;
  SampledField term = phi;
  out.density = phi;
  double base = lp_norm(phi, opts.p);
  if (base == 0) return out;
  double prev = base;
  for (int it = 1; it <= opts.max_iter; ++it) {
    term = mu.field * beurling(term);
    for (std::size_t i = 0; i < out.density.size(); ++i)
      out.density.values[i] += term.values[i];
    double cur = lp_norm(term, opts.p);
    out.iterations = it;
    if (prev > 0) out.ratio = std::max(0.5 * out.ratio, cur / prev);
    prev = cur > 0 ? cur : prev;
    if (cur <= opts.series_tol * base) return out;
  }
  std::ostringstream msg;
  msg << "Neumann series did not converge in " << opts.max_iter
      << " iterations; measured contraction ratio " << out.ratio << " (d = " << mu.d << ")";
  throw std::runtime_error(msg.str());
}

// || f_zbar - mu f_z ||_2 / || f_z ||_2 over an interior mask, independent
// finite differences of the sampled mapping
double fd_residual(const SampledField& f, const BeltramiCoefficient& mu,
                   const std::function<bool(Complex)>& mask) {
  auto fz = fd_dz(f, 4);
  auto fzb = fd_dzbar(f, 4);
  const auto& g = *f.grid;
  double num = 0, den = 0;
  for (int iy = 2; iy < g.n - 2; ++iy)
    for (int ix = 2; ix < g.n - 2; ++ix) {
      std::size_t i = g.index(ix, iy);
      if (!mask(g.nodes[i])) continue;
      Complex muv = mu.eval(g.nodes[i]);
      num += g.weights[i] * std::norm(fzb.values[i] - muv * fz.values[i]);
      den += g.weights[i] * std::norm(fz.values[i]);
    }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

double operator_residual(const SampledField& fz, const SampledField& fzbar,
                         const BeltramiCoefficient& mu) {
  const auto& g = *fz.grid;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < fz.size(); ++i) {
    Complex muv = mu.eval(g.nodes[i]);
    num += g.weights[i] * std::norm(fzbar.values[i] - muv * fz.values[i]);
    den += g.weights[i] * std::norm(fz.values[i]);
  }
  return den > 0 ? std::sqrt(num / den) : 0.0;
}

}  // namespace

BeltramiCoefficient BeltramiCoefficient::from_field(SampledField f, double d) {
  if (!(d < 1.0) || d < 0) throw std::invalid_argument("certified bound requires 0 <= d < 1");
  double m = max_abs(f);
  if (m > d * (1.0 + 1e-12))
    throw std::invalid_argument("field exceeds the certified sup bound d");
  BeltramiCoefficient mu;
  mu.field = std::move(f);
  mu.d = d;
  return mu;
}

BeltramiCoefficient BeltramiCoefficient::from_rule(const std::function<Complex(Complex)>& rule,
                                                   const GridPtr& grid, double d) {
  auto mu = from_field(sample(rule, grid), d);
  mu.rule = rule;
  return mu;
}

Complex BeltramiCoefficient::eval(Complex z) const {
  if (rule) return rule(z);
  return interp_bilinear(field, z);
}

void BeltramiCoefficient::verify_certificates(std::uint64_t seed) const {
  if (growth.empty()) return;
  const auto& g = *field.grid;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uang(0, 2 * kPi), urad(0, 1);
  double h = g.spacing();
  for (auto [k, bk] : growth) {
    if (k < 1 || k > 2) throw std::invalid_argument("growth certificates support k = 1, 2");
    for (int trial = 0; trial < 100; ++trial) {
      double r = 0.95 * std::sqrt(urad(rng));
      Complex z = std::polar(r, uang(rng));
      if (1.0 - std::abs(z) < 8 * h) continue;
      double step = rule ? std::min(h, 0.02 * (1.0 - std::abs(z))) : h;
      auto ev = [&](Complex p) { return eval(p); };
      Complex dx = (ev(z + step) - ev(z - step)) / (2 * step);
      Complex dy = (ev(z + Complex{0, step}) - ev(z - Complex{0, step})) / (2 * step);
      double bound = bk * std::pow(1.0 - std::abs(z), -static_cast<double>(k)) * 1.35 + 1e-9;
      if (k == 1) {
        double worst = std::max(std::abs(0.5 * (dx - Complex{0, 1} * dy)),
                                std::abs(0.5 * (dx + Complex{0, 1} * dy)));
        if (worst > bound)
          throw std::domain_error("growth certificate (k=1) violated at a spot-check node");
      } else {
        Complex dxx = (ev(z + 2.0 * step) - 2.0 * ev(z) + ev(z - 2.0 * step)) / (4 * step * step);
        Complex dyy = (ev(z + Complex{0, 2 * step}) - 2.0 * ev(z) +
                       ev(z - Complex{0, 2 * step})) /
                      (4 * step * step);
        Complex dxy = (ev(z + step + Complex{0, step}) - ev(z + step - Complex{0, step}) -
                       ev(z - step + Complex{0, step}) + ev(z - step - Complex{0, step})) /
                      (4 * step * step);
        Complex dzz = 0.25 * (dxx - dyy) - Complex{0, 0.5} * dxy;
        Complex dzbzb = 0.25 * (dxx - dyy) + Complex{0, 0.5} * dxy;
        Complex dzzb = 0.25 * (dxx + dyy);
        double worst = std::max({std::abs(dzz), std::abs(dzbzb), std::abs(dzzb)});
        if (worst > bound)
          throw std::domain_error("growth certificate (k=2) violated at a spot-check node");
      }
    }
  }
}

Complex interp_bilinear(const SampledField& f, Complex w) {
  const auto& g = *f.grid;
  double fx = (w.real() + g.extent) / g.hx - 0.5;
  double fy = (w.imag() + g.extent) / g.hy - 0.5;
  int ix = static_cast<int>(std::floor(fx));
  int iy = static_cast<int>(std::floor(fy));
  ix = std::clamp(ix, 0, g.n - 2);
  iy = std::clamp(iy, 0, g.n - 2);
  double ax = std::clamp(fx - ix, 0.0, 1.0);
  double ay = std::clamp(fy - iy, 0.0, 1.0);
  Complex v00 = f.values[g.index(ix, iy)], v10 = f.values[g.index(ix + 1, iy)];
  Complex v01 = f.values[g.index(ix, iy + 1)], v11 = f.values[g.index(ix + 1, iy + 1)];
  return (1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 + (1 - ax) * ay * v01 + ax * ay * v11;
}

SampledField solve_inhomogeneous(const BeltramiCoefficient& mu, const SampledField& phi,
                                 const SolveOptions& opts) {
  require_square_grid(phi, "solve_inhomogeneous");
  if (!mu.field.grid->same_layout(*phi.grid))
    throw std::invalid_argument("solve_inhomogeneous: mu and phi live on different grids");
  auto res = neumann_density(mu, phi, opts);
  return cauchy(res.density);
}

QcMapping principal_solution(const BeltramiCoefficient& mu, const SolveOptions& opts) {
  require_square_grid(mu.field, "principal_solution");
  const auto& g = *mu.field.grid;

  NeumannResult res;
  if (opts.exponential) {
    // F = z + C(mu e^sigma) with sigma solving (1.9) for phi = mu_z; keeps
    // F_z = e^sigma as the local-homeomorphism witness
    auto mu_z = spectral_dz(mu.field);
    for (std::size_t i = 0; i < mu_z.size(); ++i)  // supp mu_z inside supp mu
      if (mu.field.values[i] == Complex{0, 0}) mu_z.values[i] = {0, 0};
    auto gs = neumann_density(mu, mu_z, opts);
    auto sigma = cauchy(gs.density);
    res.density = SampledField(mu.field.grid);
    for (std::size_t i = 0; i < res.density.size(); ++i)
      res.density.values[i] = mu.field.values[i] * std::exp(sigma.values[i]);
    res.iterations = gs.iterations;
    res.ratio = gs.ratio;
  } else {
    res = neumann_density(mu, mu.field, opts);
  }

  QcMapping out;
  out.kind = MappingKind::Principal;
  out.f = cauchy(res.density);
  out.fz = beurling(res.density);
  out.fzbar = res.density;
  for (std::size_t i = 0; i < out.f.size(); ++i) {
    out.f.values[i] += g.nodes[i];
    out.fz.values[i] += 1.0;
  }
  out.diagnostics.iterations = res.iterations;
  out.diagnostics.contraction = res.ratio;
  out.diagnostics.residual = operator_residual(out.fz, out.fzbar, mu);
  out.diagnostics.residual_fd =
      fd_residual(out.f, mu, [&](Complex z) { return std::abs(z) < g.extent - 2 * g.hx; });
  return out;
}

namespace {

// pointwise machinery of the reflected map f~(z) = 1/conj(f0_mu(1/conj(z)))
struct ReflectedMap {
  const CauchyEvaluator& ev;
  Complex sigma0;  // sigma(0), subtracted so that f0(0) = 0

  Complex f0(Complex w) const { return w + ev.value(w) - sigma0; }
  Complex f0_prime(Complex w) const { return 1.0 + ev.derivative(w); }

  Complex value(Complex z) const {
    Complex u = 1.0 / std::conj(z);
    return 1.0 / std::conj(f0(u));
  }
  Complex derivative(Complex z) const {
    Complex u = 1.0 / std::conj(z);
    Complex G = f0(u);
    return std::conj(f0_prime(u)) / (z * z * std::conj(G) * std::conj(G));
  }
};

}  // namespace

QcMapping normal_solution(const BeltramiCoefficient& mu, const SolveOptions& opts) {
  require_square_grid(mu.field, "normal_solution");
  const auto& gin = *mu.field.grid;
  double h = gin.spacing();

  // working grid for the principal stages, wide enough to hold the image of
  // the reflected map
  GridPtr W = gin.extent >= 2.0 ? mu.field.grid : make_grid(GridKind::SquareLattice, gin.n, 2.0);
  BeltramiCoefficient muW = mu;
  if (W != mu.field.grid) {
    SampledField mf(W);
    for (std::size_t i = 0; i < W->size(); ++i) mf.values[i] = mu.eval(W->nodes[i]);
    muW.field = std::move(mf);
  }
  mask_outside_disk(muW.field);

  // stage 1: principal solution of mu, kept as a pointwise evaluator
  auto res_mu = neumann_density(muW, muW.field, opts);
  CauchyEvaluator ev_mu(res_mu.density);
  ReflectedMap ftilde{ev_mu, ev_mu.value({0, 0})};

  // forward table of f~ and f~' on the input grid
  SampledField ft_tab(mu.field.grid, "ftilde");
  SampledField ftz_tab(mu.field.grid, "ftilde_z");
  std::vector<std::size_t> disk_nodes;
  for (std::size_t i = 0; i < gin.size(); ++i)
    if (std::abs(gin.nodes[i]) < 1.0) disk_nodes.push_back(i);
  parallel_for(disk_nodes.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      std::size_t i = disk_nodes[t];
      ft_tab.values[i] = ftilde.value(gin.nodes[i]);
      ftz_tab.values[i] = ftilde.derivative(gin.nodes[i]);
    }
  });

  // image radius of f~(D), restricting the Newton targets
  double r_img = 0;
  for (int a = 0; a < 256; ++a) {
    Complex z = std::polar(1.0 - 2 * h, 2 * kPi * a / 256.0);
    r_img = std::max(r_img, std::abs(ftilde.value(z)));
  }
  r_img += 6 * h;

  // stage 2: lambda(w) = [mu f~_z / conj(f~_z)](f~^{-1}(w)), Newton inversion
  SampledField lambda(W, "lambda");
  {
    const auto& g = *W;
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < g.size(); ++i)
      if (std::abs(g.nodes[i]) <= r_img) targets.push_back(i);
    parallel_for(targets.size(), [&](std::size_t lo, std::size_t hi) {
      Complex warm{0, 0};
      bool have_warm = false;
      for (std::size_t t = lo; t < hi; ++t) {
        std::size_t i = targets[t];
        Complex w = g.nodes[i];
        Complex z = have_warm ? warm : w;
        if (std::abs(z) >= 1.0) z *= (1.0 - h) / std::abs(z);
        bool ok = false;
        for (int it = 0; it < 40; ++it) {
          Complex err = ftilde.value(z) - w;
          if (std::abs(err) <= 1e-11) {
            ok = true;
            break;
          }
          z -= err / ftilde.derivative(z);
          if (std::abs(z) >= 1.0) {
            if (it > 25) break;
            z *= (1.0 - 0.5 * h) / std::abs(z);
          }
        }
        if (ok && std::abs(z) < 1.0) {
          Complex fz = ftilde.derivative(z);
          lambda.values[i] = mu.eval(z) * fz / std::conj(fz);
          warm = z;
          have_warm = true;
        } else {
          have_warm = false;
        }
      }
    });
  }
  // clip rounding overshoots of |lambda| above d
  for (auto& v : lambda.values) {
    double a = std::abs(v);
    if (a > mu.d && a > 0) v *= mu.d / a;
  }

  // stage 3: principal solution of lambda
  auto lam = BeltramiCoefficient::from_field(std::move(lambda), mu.d);
  auto res_lam = neumann_density(lam, lam.field, opts);
  CauchyEvaluator ev_lam(res_lam.density);
  Complex sig_lam0 = ev_lam.value({0, 0});
  auto f0_lam = [&](Complex w) { return w + ev_lam.value(w) - sig_lam0; };

  // derivative fields of f0_lambda, interpolated at the composition points
  SampledField dlam_z = beurling(res_lam.density);
  for (std::size_t i = 0; i < dlam_z.size(); ++i) dlam_z.values[i] += 1.0;
  const SampledField& dlam_zb = res_lam.density;

  // stage 4: composition and normalization, f = f0_lambda(f~(z)) / f_c(1)
  Complex ft1 = 1.0 / std::conj(ftilde.f0(Complex{1.0, 0.0}));
  Complex fc1 = f0_lam(ft1);
  if (std::abs(std::abs(fc1) - 1.0) > 0.1)
    throw std::runtime_error("normal_solution: |f_c(1)| deviates from 1 by more than 0.1");

  QcMapping out;
  out.kind = MappingKind::Normal;
  out.f = SampledField(mu.field.grid, "normal");
  out.fz = SampledField(mu.field.grid);
  out.fzbar = SampledField(mu.field.grid);
  parallel_for(disk_nodes.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      std::size_t i = disk_nodes[t];
      Complex w = ft_tab.values[i];
      out.f.values[i] = f0_lam(w) / fc1;
      Complex dz = interp_bilinear(dlam_z, w);
      Complex dzb = interp_bilinear(dlam_zb, w);
      Complex ftz = ftz_tab.values[i];
      out.fz.values[i] = dz * ftz / fc1;
      out.fzbar.values[i] = dzb * std::conj(ftz) / fc1;
    }
  });

  out.diagnostics.iterations = res_mu.iterations + res_lam.iterations;
  out.diagnostics.contraction = std::max(res_mu.ratio, res_lam.ratio);
  {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < gin.size(); ++i) {
      if (std::abs(gin.nodes[i]) > 1.0 - 4 * h) continue;
      Complex muv = mu.eval(gin.nodes[i]);
      num += gin.weights[i] * std::norm(out.fzbar.values[i] - muv * out.fz.values[i]);
      den += gin.weights[i] * std::norm(out.fz.values[i]);
    }
    out.diagnostics.residual = den > 0 ? std::sqrt(num / den) : 0;
    out.diagnostics.residual_fd =
        fd_residual(out.f, mu, [&](Complex z) { return std::abs(z) < 1.0 - 4 * h; });
  }
  return out;
}

QcMapping principal_log_solution(const BeltramiCoefficient& nu, const SolveOptions& opts) {
  const auto& f = nu.field;
  if (!f.grid || f.grid->kind != GridKind::StripPeriodic)
    throw std::invalid_argument("principal_log_solution: nu must live on a strip grid");
  const auto& g = *f.grid;

  // support condition: nu must vanish before the right window edge
  double m = max_abs(f);
  for (int ip = 0; ip < g.n; ++ip)
    for (int ix = g.n - 2; ix < g.n; ++ix)
      if (std::abs(f.values[g.index(ix, ip)]) > 1e-12 * m)
        throw std::invalid_argument("principal_log_solution: nu support touches the right xi edge");

  // g = nu (Id - T_H nu)^{-1}(1), iterated as g <- nu + nu T_H g
  SampledField dens = f;
  SampledField term = f;
  double base = lp_norm(f, opts.p);
  int iters = 0;
  double ratio = 0, prev = base;
  if (base > 0) {
    for (int it = 1; it <= opts.max_iter; ++it) {
      term = f * strip_beurling(term);
      for (std::size_t i = 0; i < dens.size(); ++i) dens.values[i] += term.values[i];
      double cur = lp_norm(term, opts.p);
      iters = it;
      if (prev > 0) ratio = std::max(0.5 * ratio, cur / prev);
      prev = cur > 0 ? cur : prev;
      if (cur <= opts.series_tol * base) break;
      if (it == opts.max_iter) {
        std::ostringstream msg;
        msg << "log-solution series did not converge; measured ratio " << ratio;
        throw std::runtime_error(msg.str());
      }
    }
  }

  QcMapping out;
  out.kind = MappingKind::LogPrincipal;
  out.f = strip_cauchy(dens);
  out.fz = strip_beurling(dens);
  out.fzbar = dens;
  double supdev = 0;
  for (std::size_t i = 0; i < out.f.size(); ++i) {
    supdev = std::max(supdev, std::abs(out.f.values[i]));
    out.f.values[i] += g.nodes[i];
    out.fz.values[i] += 1.0;
  }
  out.diagnostics.sup_deviation = supdev;
  out.diagnostics.iterations = iters;
  out.diagnostics.contraction = ratio;
  out.diagnostics.residual = operator_residual(out.fz, out.fzbar, nu);
  {
    auto fzb = fd_dzbar(out.f, 4);
    auto fz = fd_dz(out.f, 4);
    double num = 0, den = 0;
    for (int ip = 0; ip < g.n; ++ip)
      for (int ix = 2; ix < g.n - 2; ++ix) {
        std::size_t i = g.index(ix, ip);
        num += g.weights[i] * std::norm(fzb.values[i] - f.values[i] * fz.values[i]);
        den += g.weights[i] * std::norm(fz.values[i]);
      }
    out.diagnostics.residual_fd = den > 0 ? std::sqrt(num / den) : 0;
  }
  return out;
}

namespace {

long binomial(int n, int k) {
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// P_k(f_k, ..., f_1) = sum_{i=1..k} C(k,i) mu_{w^i} f_{k+1-i} + mu_{w^{k+1}}
SampledField chain_rhs(const std::vector<SampledField>& mu_derivs,
                       const std::vector<SampledField>& levels, int k) {
  SampledField rhs = mu_derivs[k];  // index j-1 holds mu_{w^j}
  for (int i = 1; i <= k; ++i) {
    double c = static_cast<double>(binomial(k, i));
    const auto& f = levels[k - i];  // level j at index j-1
    const auto& md = mu_derivs[i - 1];
    for (std::size_t p = 0; p < rhs.size(); ++p) rhs.values[p] += c * md.values[p] * f.values[p];
  }
  return rhs;
}

double weighted_sup(const SampledField& f, const DomainGeometry& geom, double s) {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double d = geom.dist(f.grid->nodes[i]);
    if (d <= 0) continue;
    m = std::max(m, std::abs(f.values[i]) * std::pow(d, s));
  }
  return m;
}

// staircase Int_0^w (p ds + q ds_bar): trapezoid along the anchor row, then
// along columns (x_first) or transposed
SampledField staircase_integral(const SampledField& p, const SampledField& q, bool x_first) {
  const auto& g = *p.grid;
  int n = g.n;
  int i0 = n / 2;  // node nearest the origin on a cell-centered lattice
  SampledField out(p.grid);

  auto step_x = [&](int iy, int ix, int dir) {
    std::size_t ia = g.index(ix, iy), ib = g.index(ix + dir, iy);
    Complex integ = 0.5 * (p.values[ia] + q.values[ia] + p.values[ib] + q.values[ib]);
    return integ * (dir * g.hx);
  };
  auto step_y = [&](int ix, int iy, int dir) {
    std::size_t ia = g.index(ix, iy), ib = g.index(ix, iy + dir);
    Complex integ = Complex{0, 0.5} * ((p.values[ia] + p.values[ib]) -
                                       (q.values[ia] + q.values[ib]));
    return integ * (dir * g.hy);
  };

  // seed the anchor with the short segment from the true origin to the
  // nearest node (first-order; the origin is a cell corner)
  std::size_t anchor = g.index(i0, i0);
  Complex z0 = g.nodes[anchor];
  out.values[anchor] = p.values[anchor] * z0 + q.values[anchor] * std::conj(z0);

  if (x_first) {
    for (int dir : {1, -1})
      for (int ix = i0; ix + dir >= 0 && ix + dir < n; ix += dir)
        out.values[g.index(ix + dir, i0)] = out.values[g.index(ix, i0)] + step_x(i0, ix, dir);
    for (int ix = 0; ix < n; ++ix)
      for (int dir : {1, -1})
        for (int iy = i0; iy + dir >= 0 && iy + dir < n; iy += dir)
          out.values[g.index(ix, iy + dir)] = out.values[g.index(ix, iy)] + step_y(ix, iy, dir);
  } else {
    for (int dir : {1, -1})
      for (int iy = i0; iy + dir >= 0 && iy + dir < n; iy += dir)
        out.values[g.index(i0, iy + dir)] = out.values[g.index(i0, iy)] + step_y(i0, iy, dir);
    for (int iy = 0; iy < n; ++iy)
      for (int dir : {1, -1})
        for (int ix = i0; ix + dir >= 0 && ix + dir < n; ix += dir)
          out.values[g.index(ix + dir, iy)] = out.values[g.index(ix, iy)] + step_x(iy, ix, dir);
  }
  return out;
}

}  // namespace

DerivativeChain derivative_chain_solve(const BeltramiCoefficient& mu,
                                       const DomainGeometry& geometry, const ReflectionRule& rule,
                                       int k, int m, const ChainOptions& opts) {
  require_square_grid(mu.field, "derivative_chain_solve");
  if (k < 1) throw std::invalid_argument("derivative_chain_solve: k >= 1");
  if (m < k + 7) throw std::invalid_argument("derivative_chain_solve: needs m >= k + 7");
  if (mu.d > opts.b_threshold)
    throw std::invalid_argument("derivative_chain_solve: b too large for the iteration");

  // mu_{w^j}, j = 1..k+1 (mu smooth and compactly supported; the spectral
  // derivative rings at the 1e-12 level outside the support, masked away)
  std::vector<SampledField> mu_derivs;
  {
    SampledField cur = mu.field;
    for (int j = 1; j <= k + 1; ++j) {
      cur = spectral_dz(cur);
      for (std::size_t i = 0; i < cur.size(); ++i)
        if (mu.field.values[i] == Complex{0, 0}) cur.values[i] = {0, 0};
      mu_derivs.push_back(cur);
    }
  }

  auto solve_level = [&](const SampledField& psi, double tol) {
    SampledField term = psi;
    SampledField dens = psi;
    double base = lp_norm(psi, 2.0);
    if (base == 0) return dens;
    for (int it = 1; it <= opts.solve.max_iter; ++it) {
      term = mu.field * domain_beurling_m(term, geometry, rule, m);
      for (std::size_t i = 0; i < dens.size(); ++i) dens.values[i] += term.values[i];
      if (lp_norm(term, 2.0) <= tol * base) break;
      if (it == opts.solve.max_iter)
        throw std::runtime_error("derivative_chain_solve: inner Neumann series stalled");
    }
    return domain_cauchy_m(dens, geometry, rule, m);
  };

  DerivativeChain chain;
  chain.m = m;
  chain.mu_w = mu_derivs[0];

  // first step, top level from mu_{w^{k+1}}, lower levels by path integrals
  std::vector<SampledField> levels(k, SampledField(mu.field.grid));
  levels[k - 1] = solve_level(mu_derivs[k], 1e-8);
  for (int j = k; j >= 2; --j) {
    SampledField tilde = chain_rhs(mu_derivs, levels, j - 1);
    for (std::size_t i = 0; i < tilde.size(); ++i)
      tilde.values[i] += mu.field.values[i] * levels[j - 1].values[i];
    levels[j - 2] = staircase_integral(levels[j - 1], tilde, true);
    mask_outside_disk(levels[j - 2]);
  }

  double prev_inc = -1;
  for (int outer = 1; outer <= 60; ++outer) {
    SampledField rhs = chain_rhs(mu_derivs, levels, k);
    double inner_tol =
        prev_inc < 0 ? 1e-8 : std::max(opts.solve.series_tol, 0.02 * prev_inc);
    SampledField top = solve_level(rhs, inner_tol);

    std::vector<SampledField> next(levels);
    next[k - 1] = top;
    for (int j = k; j >= 2; --j) {
      SampledField tilde = chain_rhs(mu_derivs, levels, j - 1);
      for (std::size_t i = 0; i < tilde.size(); ++i)
        tilde.values[i] += mu.field.values[i] * levels[j - 1].values[i];
      next[j - 2] = staircase_integral(next[j - 1], tilde, true);
      mask_outside_disk(next[j - 2]);
    }

    double inc = 0, ref = 0;
    for (int j = 1; j <= k; ++j) {
      SampledField diff = next[j - 1] - levels[j - 1];
      inc = std::max(inc, weighted_sup(diff, geometry, j));
      ref = std::max(ref, weighted_sup(next[j - 1], geometry, j));
    }
    levels.swap(next);
    chain.iterations = outer;
    if (prev_inc > 1e-300) chain.contraction = inc / prev_inc;
    if (ref > 0 && inc <= 1e-10 * ref) break;
    if (outer >= 8 && chain.contraction >= 1.0) {
      std::ostringstream msg;
      msg << "derivative_chain_solve: iteration not contracting, measured ratio "
          << chain.contraction;
      throw std::runtime_error(msg.str());
    }
    prev_inc = inc;
  }

  chain.levels = levels;

  // per-level residuals (weighted interior sup) and boundary-decay fits
  const auto& g = *mu.field.grid;
  double h = g.spacing();
  for (int j = 1; j <= k; ++j) {
    auto fz = fd_dz(levels[j - 1], 4);
    auto fzb = fd_dzbar(levels[j - 1], 4);
    SampledField rhs = chain_rhs(mu_derivs, levels, j);
    double worst = 0;
    for (int iy = 2; iy < g.n - 2; ++iy)
      for (int ix = 2; ix < g.n - 2; ++ix) {
        std::size_t i = g.index(ix, iy);
        double d = geometry.dist(g.nodes[i]);
        if (d < 6 * h) continue;
        Complex r = fzb.values[i] - mu.field.values[i] * fz.values[i] - rhs.values[i];
        worst = std::max(worst, std::abs(r) * std::pow(d, j + 1));
      }
    chain.residuals.push_back(worst);
    try {
      chain.decay_exponents.push_back(
          decay_exponent_fit(levels[j - 1], geometry, {4 * h, 0.2}).exponent);
    } catch (const std::exception&) {
      chain.decay_exponents.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return chain;
}

QcMapping reconstruct_map(const DerivativeChain& chain, const BeltramiCoefficient& mu,
                          const DomainGeometry& geometry, const SolveOptions& opts) {
  if (chain.levels.empty()) throw std::invalid_argument("reconstruct_map: empty chain");
  const auto& f1 = chain.levels[0];
  const auto& g = *f1.grid;
  double h = g.spacing();

  // g(w) = Int f_1 ds + (mu f_1 + mu_w) ds_bar
  SampledField tilde1 = chain.mu_w;
  for (std::size_t i = 0; i < tilde1.size(); ++i)
    tilde1.values[i] += mu.field.values[i] * f1.values[i];
  SampledField gx = staircase_integral(f1, tilde1, true);
  SampledField gy = staircase_integral(f1, tilde1, false);
  double disc_g = 0;
  for (std::size_t i = 0; i < gx.size(); ++i)
    if (geometry.dist(g.nodes[i]) > 0)
      disc_g = std::max(disc_g, std::abs(gx.values[i] - gy.values[i]));

  // F(w) = Int e^g ds + mu e^g ds_bar
  SampledField eg(f1.grid), meg(f1.grid);
  for (std::size_t i = 0; i < eg.size(); ++i) {
    eg.values[i] = std::exp(gx.values[i]);
    meg.values[i] = mu.field.values[i] * eg.values[i];
  }
  SampledField Fx = staircase_integral(eg, meg, true);
  SampledField Fy = staircase_integral(eg, meg, false);
  double disc_f = 0;
  for (std::size_t i = 0; i < Fx.size(); ++i)
    if (geometry.dist(g.nodes[i]) > 0)
      disc_f = std::max(disc_f, std::abs(Fx.values[i] - Fy.values[i]));

  QcMapping out;
  out.kind = MappingKind::Reconstructed;
  out.f = Fx;
  out.fz = eg;      // F_w = e^g by construction
  out.fzbar = meg;  // F_wbar = mu e^g
  out.diagnostics.path_discrepancy = std::max(disc_g, disc_f);
  out.diagnostics.residual_fd =
      fd_residual(out.f, mu, [&](Complex z) { return geometry.dist(z) > 4 * h; });
  out.diagnostics.residual = out.diagnostics.residual_fd;
  if (out.diagnostics.path_discrepancy > 10.0 * opts.residual_tol)
    throw std::runtime_error("reconstruct_map: path discrepancy exceeds 10x residual tolerance");
  return out;
}

double univalence_margin(const SampledField& hfield, const DomainGeometry& geometry) {
  require_square_grid(hfield, "univalence_margin");
  const auto& g = *hfield.grid;
  double h = g.spacing();
  auto d1 = fd_dz(hfield, 4);
  auto d2 = fd_dz(d1, 4);
  double scale = max_abs(d1);
  double margin = 0;
  for (int iy = 4; iy < g.n - 4; ++iy)
    for (int ix = 4; ix < g.n - 4; ++ix) {
      std::size_t i = g.index(ix, iy);
      double dist = geometry.kind == GeometryKind::Plane ? 1.0 : geometry.dist(g.nodes[i]);
      if (geometry.kind != GeometryKind::Plane && dist < 4 * h) continue;
      if (std::abs(d1.values[i]) < 1e-12 * scale) {
        std::ostringstream msg;
        msg << "univalence_margin: |h'| degenerates near z = (" << g.nodes[i].real() << ", "
            << g.nodes[i].imag() << ")";
        throw std::domain_error(msg.str());
      }
      margin = std::max(margin, std::abs(d2.values[i] / d1.values[i]) * dist);
    }
  return margin;
}

double univalence_margin(const QcMapping& mapping, const DomainGeometry& geometry) {
  return univalence_margin(mapping.f, geometry);
}

QuasidiskDomain make_quasidisk(const QcMapping& map_on_disk) {
  auto fptr = std::make_shared<SampledField>(map_on_disk.f);
  const auto& g = *fptr->grid;
  double h = g.spacing();
  double r_safe = 1.0 - 3 * h;
  double r_in = r_safe - 4 * h;

  // forward chart with first-order radial continuation beyond r_safe, so
  // interpolation stencils never straddle the mask edge
  auto fwd = [fptr, r_safe, r_in](Complex z) {
    double r = std::abs(z);
    if (r <= r_safe) return interp_bilinear(*fptr, z);
    Complex u = r > 0 ? z / r : Complex{1, 0};
    Complex f1 = interp_bilinear(*fptr, r_safe * u);
    Complex f2 = interp_bilinear(*fptr, r_in * u);
    return f1 + (r - r_safe) / (r_safe - r_in) * (f1 - f2);
  };

  auto poly = std::make_shared<std::vector<Complex>>();
  constexpr int kBoundary = 512;
  poly->reserve(kBoundary);
  for (int a = 0; a < kBoundary; ++a)
    poly->push_back(fwd(std::polar(1.0, 2 * kPi * a / kBoundary)));

  auto dist_fn = [poly](Complex w) {
    double best = std::numeric_limits<double>::infinity();
    const auto& P = *poly;
    for (std::size_t i = 0; i < P.size(); ++i) {
      Complex a = P[i], b = P[(i + 1) % P.size()];
      Complex ab = b - a;
      double t = std::clamp(((w - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
      best = std::min(best, std::abs(w - (a + t * ab)));
    }
    return best;
  };

  auto fzp = std::make_shared<SampledField>(map_on_disk.fz);
  auto fzbp = std::make_shared<SampledField>(map_on_disk.fzbar);
  auto inv = [fzp, fzbp, fwd](Complex w) {
    Complex z = w;
    if (std::abs(z) > 0.98) z *= 0.98 / std::abs(z);
    for (int it = 0; it < 60; ++it) {
      Complex err = fwd(z) - w;
      if (std::abs(err) < 1e-11) return z;
      Complex a = interp_bilinear(*fzp, z);
      Complex b = interp_bilinear(*fzbp, z);
      double det = std::norm(a) - std::norm(b);
      if (det <= 0) break;
      // solve a dz + b conj(dz) = -err
      Complex dz = (-err * std::conj(a) + std::conj(-err) * b) / det;
      z += dz;
      if (std::abs(z) > 1.0) z *= 0.995 / std::abs(z);
    }
    throw std::domain_error("quasidisk inverse: Newton did not converge");
  };

  QuasidiskDomain out;
  out.geometry = DomainGeometry::quasidisk(dist_fn, [fwd, inv](Complex w) {
    return exterior_extension(fwd, 1.0 / std::conj(inv(w)));
  });
  out.rule = ReflectionRule::pullback(out.geometry, fwd, inv);
  return out;
}

}  // namespace qbel
