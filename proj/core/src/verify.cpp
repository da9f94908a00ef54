#include "quasibel/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "quasibel/norms.hpp"
#include "quasibel/params.hpp"
#include "quasibel/solver.hpp"

namespace qbel {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double sup_abs(const SampledField& f) {
  double m = 0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

void clip_tiny(SampledField& f) {
  double m = sup_abs(f);
  if (m == 0) return;
  double tol = 1e-13 * m;
  for (auto& v : f.values)
    if (std::abs(v) < tol) v = {0, 0};
}

Complex gaussian_dzbar(Complex z, Complex c, double w) {
  Complex u = z - c;
  double w2 = w * w;
  return -(u / w2) * std::exp(-std::norm(u) / w2);
}

Complex cap_bump(Complex z, Complex c, double w) {
  double s = std::norm((z - c) / w);
  return s < 1.0 ? Complex{std::exp(-1.0 / (1.0 - s)), 0} : Complex{0, 0};
}

// seeded trial fields per operator family; even trials are derivative-type
// (clean norms), odd trials probe boundary and angular structure
SampledField norm_trial_field(const OperatorSpec& spec, int trial, std::uint64_t seed,
                              const GridPtr& grid) {
  std::mt19937_64 rng(splitmix(seed ^ (0x51ed2701ULL * (trial + 1))));
  std::uniform_real_distribution<double> u01(0, 1);
  std::normal_distribution<double> gauss;

  bool disk = spec.family == OperatorFamily::CauchyM || spec.family == OperatorFamily::BeurlingM ||
              spec.family == OperatorFamily::DomainCauchyM ||
              spec.family == OperatorFamily::DomainBeurlingM;
  bool strip = spec.family == OperatorFamily::StripCauchy ||
               spec.family == OperatorFamily::StripBeurling;

  SampledField f(grid);
  if (strip) {
    double xi0 = -2.0 + 0.6 * (u01(rng) - 0.5);
    double w = 0.4 + 0.3 * u01(rng);
    int k = 1 + static_cast<int>(u01(rng) * 3);
    Complex amp{gauss(rng), gauss(rng)};
    bool deriv = trial % 2 == 0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
      double xi = grid->nodes[i].real(), phi = grid->nodes[i].imag();
      double env = std::exp(-(xi - xi0) * (xi - xi0) / (w * w));
      double denv = env * (-2.0 * (xi - xi0) / (w * w));
      Complex eik = std::polar(1.0, k * phi);
      f.values[i] = deriv ? amp * 0.5 * (denv - k * env) * eik : amp * env * eik;
    }
    clip_tiny(f);
    return f;
  }

  if (disk) {
    if (trial % 2 == 0) {
      int nb = 1 + static_cast<int>(u01(rng) * 3);
      for (int b = 0; b < nb; ++b) {
        double rc = 0.85 * u01(rng);
        Complex c = std::polar(rc, 2 * kPi * u01(rng));
        double w = std::min(0.9 * (1.0 - rc), 0.1 + 0.25 * u01(rng));
        Complex amp{gauss(rng), gauss(rng)};
        for (std::size_t i = 0; i < grid->size(); ++i)
          f.values[i] += amp * cap_bump(grid->nodes[i], c, w);
      }
    } else {
      // boundary-heavy radial-angular mode r^p (1-r^2)^q e^{i k theta}
      int k = static_cast<int>(u01(rng) * 13) - 6;
      int p = static_cast<int>(u01(rng) * 3);
      double q = 0.5 + 2.5 * u01(rng);
      double phase = 2 * kPi * u01(rng);
      for (std::size_t i = 0; i < grid->size(); ++i) {
        double r = std::abs(grid->nodes[i]);
        if (r >= 1.0) continue;
        double th = std::arg(grid->nodes[i]);
        f.values[i] = std::pow(r, p) * std::pow(1.0 - r * r, q) *
                      std::polar(1.0, k * th + phase);
      }
    }
    mask_outside_disk(f);
    return f;
  }

  // plane families
  int nb = 2 + static_cast<int>(u01(rng) * 3);
  for (int b = 0; b < nb; ++b) {
    Complex c{0.7 * (u01(rng) - 0.5), 0.7 * (u01(rng) - 0.5)};
    Complex amp{gauss(rng), gauss(rng)};
    if (trial % 2 == 0) {
      double w = 0.2 + 0.08 * u01(rng);
      for (std::size_t i = 0; i < grid->size(); ++i)
        f.values[i] += amp * gaussian_dzbar(grid->nodes[i], c, w);
    } else {
      double w = 0.15 + 0.25 * u01(rng);
      for (std::size_t i = 0; i < grid->size(); ++i)
        f.values[i] += amp * cap_bump(grid->nodes[i], c, w);
    }
  }
  clip_tiny(f);
  return f;
}

GridPtr grid_for_spec(const OperatorSpec& spec, int n) {
  if (spec.family == OperatorFamily::StripCauchy || spec.family == OperatorFamily::StripBeurling)
    return make_grid_strip(n, -4.0, 1.0);
  if (spec.family == OperatorFamily::CauchyM || spec.family == OperatorFamily::BeurlingM ||
      spec.family == OperatorFamily::DomainCauchyM ||
      spec.family == OperatorFamily::DomainBeurlingM)
    return make_grid(GridKind::SquareLattice, n, 1.25);
  return make_grid(GridKind::SquareLattice, n, 2.0);
}

}  // namespace

double operator_norm_estimate(const OperatorSpec& spec, double p, int trials, std::uint64_t seed,
                              int n) {
  if (trials < 1) throw std::invalid_argument("operator_norm_estimate: trials >= 1");
  auto grid = grid_for_spec(spec, n);
  std::optional<ReflectionRule> rule;
  if (spec.family == OperatorFamily::DomainCauchyM ||
      spec.family == OperatorFamily::DomainBeurlingM)
    rule = ReflectionRule::disk_inversion();
  double best = 0;
  for (int t = 0; t < trials; ++t) {
    auto f = norm_trial_field(spec, t, seed, grid);
    double den = lp_norm(f, p);
    if (den == 0) continue;
    auto out = apply_operator(spec, f, rule);
    best = std::max(best, lp_norm(out, p) / den);
  }
  return best;
}

DecayFit decay_exponent_fit(const SampledField& field, const DomainGeometry& geometry,
                            std::pair<double, double> ring_band) {
  auto [lo, hi] = ring_band;
  if (!(hi > lo) || lo <= 0) throw std::invalid_argument("decay_exponent_fit: bad ring band");
  constexpr int kRings = 8;
  double rho = std::pow(hi / lo, 1.0 / kRings);

  std::vector<double> ringmax(kRings, 0);
  std::vector<int> count(kRings, 0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    double d = geometry.dist(field.grid->nodes[i]);
    if (d < lo || d >= hi) continue;
    int r = std::min(kRings - 1, static_cast<int>(std::floor(std::log(d / lo) / std::log(rho))));
    ringmax[r] = std::max(ringmax[r], std::abs(field.values[i]));
    ++count[r];
  }

  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int usable = 0;
  double hmin = 0.5 * field.grid->spacing();
  for (int r = 0; r < kRings; ++r) {
    if (count[r] < 3 || ringmax[r] <= 0) continue;
    if (lo * std::pow(rho, r) * (rho - 1.0) < hmin) continue;  // unresolvable ring
    double mid = lo * std::pow(rho, r + 0.5);
    double x = -std::log(mid);
    double y = std::log(ringmax[r]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
    ++usable;
  }
  if (usable < 4)
    throw std::invalid_argument("decay_exponent_fit: fewer than 4 usable rings");
  double det = usable * sxx - sx * sx;
  DecayFit fit;
  fit.rings = usable;
  fit.exponent = (usable * sxy - sx * sy) / det;
  double intercept = (sy - fit.exponent * sx) / usable;
  double ybar = sy / usable, ss_tot = syy - usable * ybar * ybar, ss_res = 0;
  for (int r = 0; r < kRings; ++r) {
    if (count[r] < 3 || ringmax[r] <= 0) continue;
    if (lo * std::pow(rho, r) * (rho - 1.0) < hmin) continue;
    double mid = lo * std::pow(rho, r + 0.5);
    double e = std::log(ringmax[r]) - (intercept - fit.exponent * std::log(mid));
    ss_res += e * e;
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

double right_inverse_residual(const OperatorSpec& spec, const SampledField& field) {
  std::optional<ReflectionRule> rule;
  if (spec.family == OperatorFamily::DomainCauchyM ||
      spec.family == OperatorFamily::DomainBeurlingM)
    rule = ReflectionRule::disk_inversion();
  auto out = apply_operator(spec, field, rule);
  auto db = fd_dzbar(out, 4);
  const auto& g = *field.grid;
  double supf = sup_abs(field);
  if (supf == 0) return 0;
  bool diskfam = spec.family == OperatorFamily::CauchyM ||
                 spec.family == OperatorFamily::DomainCauchyM;
  double h = g.spacing();
  double worst = 0;
  for (int iy = 4; iy < g.n - 4; ++iy)
    for (int ix = 4; ix < g.n - 4; ++ix) {
      std::size_t i = g.index(ix, iy);
      if (diskfam && std::abs(g.nodes[i]) > 1.0 - 4 * h) continue;
      worst = std::max(worst, std::abs(db.values[i] - field.values[i]));
    }
  return worst / supf;
}

// ---- the registered estimate checks ----

namespace {

using CheckFn = EstimateReport (*)(int, std::uint64_t);

SampledField smooth_bump_field(const GridPtr& g, Complex c, double w, Complex amp) {
  return sample([=](Complex z) { return amp * cap_bump(z, c, w); }, g);
}

EstimateReport check_kz_norm(int n, std::uint64_t seed) {
  EstimateReport rep;
  rep.id = "kz-norm";
  rep.anchor = "Calderon-Zygmund: the L^p norm of the Beurling transform tends to 1 as p -> 2";
  rep.tol = 1e-3;
  OperatorSpec S(OperatorFamily::Beurling, 0, DomainGeometry::plane());
  double e2 = operator_norm_estimate(S, 2.0, 32, seed, n);
  double e25 = operator_norm_estimate(S, 2.5, 32, seed, n);
  double e3 = operator_norm_estimate(S, 3.0, 32, seed, n);
  rep.measured = {{"p2", e2}, {"p2.5", e25}, {"p3", e3}};
  rep.pass = e2 >= 0.999 && e2 <= 1.001 && e25 >= e2 - 1e-3 && e3 >= e25 - 1e-3;
  return rep;
}

EstimateReport check_s_isometry(int n, std::uint64_t seed) {
  EstimateReport rep;
  rep.id = "s-isometry";
  rep.anchor = "Beurling transform is an L2 isometry; norm 1 at p = 2";
  rep.tol = 1e-3;
  OperatorSpec S(OperatorFamily::Beurling, 0, DomainGeometry::plane());
  double est = operator_norm_estimate(S, 2.0, 64, seed, n);
  OperatorSpec S1(OperatorFamily::BeurlingM, 1, DomainGeometry::disk());
  double est1 = operator_norm_estimate(S1, 2.0, 64, seed, std::min(n, 128));
  rep.measured = {{"s_p2", est}, {"s1_p2", est1}};
  rep.pass = est >= 0.999 && est <= 1.001 && est1 >= 1.0;
  return rep;
}

EstimateReport check_th_isometry(int n, std::uint64_t seed) {
  EstimateReport rep;
  rep.id = "th-isometry";
  rep.anchor = "T_H is an isometry of L^2_H: int_H |T_H f|^2 dS = int_H |f|^2 dS";
  rep.tol = 1e-4;
  OperatorSpec T(OperatorFamily::StripBeurling, 0, DomainGeometry::strip());
  auto g = make_grid_strip(n, -4.0, 1.0);
  auto f = norm_trial_field(T, 0, seed, g);  // derivative-type
  double ratio = lp_norm(strip_beurling(f), 2.0) / lp_norm(f, 2.0);
  rep.measured = {{"ratio", ratio}};
  rep.pass = std::abs(ratio - 1.0) <= rep.tol;
  return rep;
}

double rightinv_at(OperatorFamily fam, int m, int n) {
  bool diskfam = fam == OperatorFamily::CauchyM;
  bool strip = fam == OperatorFamily::StripCauchy;
  if (strip) {
    auto g = make_grid_strip(n, -4.0, 1.0);
    auto f = sample(
        [](Complex zc) {
          double xi = zc.real();
          double env = std::exp(-(xi + 2.0) * (xi + 2.0) / 0.36);
          return Complex{env * std::cos(zc.imag()), 0.4 * env * std::sin(2 * zc.imag())};
        },
        g);
    clip_tiny(f);
    OperatorSpec spec(fam, 0, DomainGeometry::strip());
    return right_inverse_residual(spec, f);
  }
  auto g = make_grid(GridKind::SquareLattice, n, diskfam ? 1.25 : 2.0);
  auto f = smooth_bump_field(g, {0.0, 0.1}, diskfam ? 0.45 : 0.7, {1.0, -0.3});
  OperatorSpec spec(fam, m, diskfam ? DomainGeometry::disk() : DomainGeometry::plane());
  return right_inverse_residual(spec, f);
}

EstimateReport check_rightinv(const char* id, OperatorFamily fam, int m, const char* anchor,
                              int n) {
  EstimateReport rep;
  rep.id = id;
  rep.anchor = anchor;
  rep.tol = 1e-3;
  double r1 = rightinv_at(fam, m, n);
  double r2 = rightinv_at(fam, m, 2 * n);
  rep.measured = {{"res_n", r1}, {"res_2n", r2}, {"ratio", r2 > 0 ? r1 / r2 : 1e9}};
  rep.pass = r2 <= rep.tol && r2 * 3.0 <= r1;
  return rep;
}

EstimateReport check_rightinv_cauchy(int n, std::uint64_t) {
  return check_rightinv("rightinv-cauchy", OperatorFamily::Cauchy, 0,
                        "right inverse to the Cauchy-Riemann operator", n);
}
EstimateReport check_rightinv_cauchy_m(int n, std::uint64_t) {
  return check_rightinv("rightinv-cauchy-m", OperatorFamily::CauchyM, 3,
                        "C_m is a right inverse of the Cauchy-Riemann operator on D", n);
}
EstimateReport check_rightinv_strip(int n, std::uint64_t) {
  return check_rightinv("rightinv-strip", OperatorFamily::StripCauchy, 0,
                        "P_H is a right inverse of d/d(bar zeta) on the strip", n);
}

EstimateReport check_cm_weighted(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "cm-weighted-sweep";
  rep.anchor = "C_m maps L^p_s(D) boundedly into C^0_s(D) for m >= s, p > 2, where C does not";
  rep.tol = 0;
  std::vector<double> tamed, plain;
  for (int nn : {n / 2, n, 2 * n}) {
    auto g = make_grid(GridKind::SquareLattice, nn, 1.25);
    double h = g->spacing();
    SampledField f(g);
    for (std::size_t i = 0; i < g->size(); ++i) {
      double r = std::abs(g->nodes[i]);
      if (r <= 1.0 - 4.0 * h && g->nodes[i].real() > 0)
        f.values[i] = Complex{std::pow(1.0 - r, -2.0), 0};
    }
    WeightedNormSpec sup2(kInfExponent, 2.0, DomainGeometry::disk());
    WeightedNormSpec p42(4.0, 2.0, DomainGeometry::disk());
    double denom = weighted_norm(f, p42);
    auto c3 = cauchy_m(f, 3);
    auto c0 = cauchy(f);
    mask_outside_disk(c0);
    tamed.push_back(weighted_norm(c3, sup2) / denom);
    plain.push_back(weighted_norm(c0, sup2) / denom);
  }
  rep.measured = {{"cm_half", tamed[0]}, {"cm_n", tamed[1]},    {"cm_2n", tamed[2]},
                  {"c_half", plain[0]},  {"c_n", plain[1]},     {"c_2n", plain[2]}};
  rep.pass = tamed[2] <= 1.3 * tamed[0] + 0.1 && plain[2] >= 1.25 * plain[0];
  return rep;
}

EstimateReport check_principal_closed_form(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "principal-closed-form";
  rep.anchor = "principal solution f = z + C (Id - mu S)^{-1} mu, normalized f = z + O(1/z)";
  auto g = make_grid(GridKind::SquareLattice, n, 2.0);
  double h = g->spacing();
  rep.tol = 5 * h;
  auto mu = BeltramiCoefficient::from_rule(
      [](Complex z) { return std::abs(z) < 1.0 ? Complex{0.5, 0} : Complex{0, 0}; }, g, 0.5);
  auto map = principal_solution(mu);
  double worst = 0;
  for (std::size_t i = 0; i < g->size(); ++i) {
    Complex z = g->nodes[i];
    if (std::abs(std::abs(z) - 1.0) <= 4 * h) continue;
    Complex truth = std::abs(z) < 1.0 ? z + 0.5 * std::conj(z) : z + 0.5 / z;
    worst = std::max(worst, std::abs(map.f.values[i] - truth));
  }
  // orientation: the Jacobian stays positive strictly inside
  double minjac = 1e9;
  for (int iy = 2; iy < g->n - 2; ++iy)
    for (int ix = 2; ix < g->n - 2; ++ix) {
      std::size_t i = g->index(ix, iy);
      minjac = std::min(minjac,
                        std::norm(map.fz.values[i]) - std::norm(map.fzbar.values[i]));
    }
  rep.measured = {{"sup_err", worst}, {"min_jacobian", minjac}};
  rep.pass = worst <= rep.tol && minjac > 0;
  return rep;
}

EstimateReport check_normal_fixed_points(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "normal-fixed-points";
  rep.anchor = "the normal solution maps D onto D with f(0) = 0 and f(1) = 1";
  auto g = make_grid(GridKind::SquareLattice, n, 1.25);
  double h = g->spacing();
  rep.tol = 10 * h;
  auto mu = BeltramiCoefficient::from_rule(
      [](Complex z) {
        double r = std::abs(z);
        return (r < 1.0 && r > 0) ? 0.2 * z / std::conj(z) : Complex{0, 0};
      },
      g, 0.2);
  auto map = normal_solution(mu);
  double worst = 0, maxmod = 0, ringmin = 1e9;
  double near0 = 1e9, near1 = 1e9;
  for (std::size_t i = 0; i < g->size(); ++i) {
    Complex z = g->nodes[i];
    double r = std::abs(z);
    if (r >= 1.0) continue;
    Complex truth = z * std::sqrt(r);
    worst = std::max(worst, std::abs(map.f.values[i] - truth));
    maxmod = std::max(maxmod, std::abs(map.f.values[i]));
    if (r > 1.0 - 3 * h) ringmin = std::min(ringmin, std::abs(map.f.values[i]));
    if (std::abs(z) <= 2 * h) near0 = std::min(near0, std::abs(map.f.values[i]));
    if (std::abs(z - Complex{1, 0}) <= 3 * h)
      near1 = std::min(near1, std::abs(map.f.values[i] - Complex{1, 0}));
  }
  rep.measured = {{"sup_err", worst},   {"max_mod", maxmod}, {"ring_min", ringmin},
                  {"fix0", near0},      {"fix1", near1},     {"residual", map.diagnostics.residual}};
  rep.pass = worst <= rep.tol && maxmod <= 1.0 + rep.tol && ringmin >= 1.0 - rep.tol &&
             near0 <= rep.tol && near1 <= rep.tol;
  return rep;
}

EstimateReport check_derivative_bounds(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "derivative-bounds";
  rep.anchor = "a <= |f_z| <= A on compact subsets, both tending to 1 as d and b_1 shrink";
  rep.tol = 0;
  std::vector<double> as, As;
  auto g = make_grid(GridKind::SquareLattice, n, 1.25);
  for (double d : {0.3, 0.15, 0.05}) {
    auto mu = BeltramiCoefficient::from_rule(
        [d](Complex z) {
          double q = 1.0 - std::norm(z);
          return std::abs(z) < 1.0 ? Complex{d * q * q, 0} * std::polar(1.0, 1.0) : Complex{0, 0};
        },
        g, d);
    mu.growth = {{1, d}};
    mu.verify_certificates();
    auto map = normal_solution(mu);
    double a = 1e9, A = 0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      if (std::abs(g->nodes[i]) > 0.9) continue;
      double v = std::abs(map.fz.values[i]);
      a = std::min(a, v);
      A = std::max(A, v);
    }
    as.push_back(a);
    As.push_back(A);
  }
  rep.measured = {{"a_030", as[0]}, {"A_030", As[0]}, {"a_015", as[1]},
                  {"A_015", As[1]}, {"a_005", as[2]}, {"A_005", As[2]}};
  bool mono = as[0] <= as[1] + 1e-9 && as[1] <= as[2] + 1e-9 && As[0] >= As[1] - 1e-9 &&
              As[1] >= As[2] - 1e-9;
  rep.pass = as[0] > 0 && std::isfinite(As[0]) && mono;
  return rep;
}

EstimateReport check_log_solution_bound(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "log-solution-bound";
  rep.anchor = "|f_nu(zeta) - zeta| <= C c^2 / (1 - d) for |e^{-xi} nu| <= c";
  rep.tol = 0;
  auto g = make_grid_strip(n, -4.0, 1.0);
  auto cutoff = [](double xi) {
    if (xi <= -0.5) return 1.0;
    if (xi >= -0.25) return 0.0;
    return 0.5 * (1.0 + std::cos(kPi * (xi + 0.5) / 0.25));
  };
  std::map<double, double> sup;
  for (double c : {0.1, 0.2}) {
    auto nu = BeltramiCoefficient::from_field(
        sample([&](Complex zc) { return Complex{c * std::exp(zc.real()) * cutoff(zc.real()), 0}; },
               g),
        c + 1e-12);
    auto map = principal_log_solution(nu);
    sup[c] = map.diagnostics.sup_deviation;
  }
  double ratio = sup[0.2] / sup[0.1];
  double c_const_01 = sup[0.1] * (1.0 - 0.1) / (0.1 * 0.1);
  double c_const_02 = sup[0.2] * (1.0 - 0.2) / (0.2 * 0.2);
  rep.measured = {{"sup_c01", sup[0.1]},
                  {"sup_c02", sup[0.2]},
                  {"ratio", ratio},
                  {"C_01", c_const_01},
                  {"C_02", c_const_02}};
  rep.pass = ratio >= 2.0 && ratio <= 8.0;  // c^2 scaling within a factor 2
  return rep;
}

EstimateReport check_pm_disk_reduction(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "pm-disk-reduction";
  rep.anchor = "on D with hat w = 1/conj(w) the P_m / T_m kernels reduce to C_m / S_m";
  rep.tol = 1e-10;
  auto g = make_grid(GridKind::SquareLattice, std::min(n, 64), 1.25);
  auto f = smooth_bump_field(g, {0.15, -0.1}, 0.45, {0.8, 0.5});
  auto rule = ReflectionRule::disk_inversion();
  auto geom = DomainGeometry::disk();
  auto a = domain_cauchy_m(f, geom, rule, 2);
  auto b = cauchy_m(f, 2);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.values[i] - b.values[i]);
    den += std::norm(b.values[i]);
  }
  double rel = std::sqrt(num / den);
  auto at = domain_beurling_m(f, geom, rule, 2);
  auto bt = beurling_m(f, 2);
  num = den = 0;
  for (std::size_t i = 0; i < at.size(); ++i) {
    num += std::norm(at.values[i] - bt.values[i]);
    den += std::norm(bt.values[i]);
  }
  double relt = std::sqrt(num / den);
  rep.measured = {{"rel_P", rel}, {"rel_T", relt}};
  rep.pass = rel <= rep.tol && relt <= rep.tol;
  return rep;
}

EstimateReport check_reflection_sandwich(int n, std::uint64_t) {
  EstimateReport rep;
  rep.id = "reflection-sandwich";
  rep.anchor = "reflection sandwich: c (1-|z|^2) <= |w - hat w| <= C (1-|z|^2)";
  rep.tol = 0;
  auto g = make_grid(GridKind::SquareLattice, std::min(n, 128), 2.0);
  auto mu = BeltramiCoefficient::from_rule(
      [](Complex z) { return Complex{0.3, 0.1} * cap_bump(z, {0.2, 0.0}, 0.7); }, g, 0.35);
  auto map = principal_solution(mu);
  auto qd = make_quasidisk(map);
  double cmin = 1e9, cmax = 0;
  for (int a = 0; a < 24; ++a)
    for (int rr = 0; rr < 12; ++rr) {
      double r = 0.3 + 0.65 * rr / 11.0;  // |z| <= 0.95
      Complex z = std::polar(r, 2 * kPi * a / 24.0);
      Complex w = qd.rule.map_forward(z);
      Complex what = exterior_extension(qd.rule.map_forward, 1.0 / std::conj(z));
      double ratio = std::abs(w - what) / (1.0 - std::norm(z));
      cmin = std::min(cmin, ratio);
      cmax = std::max(cmax, ratio);
    }
  rep.measured = {{"c", cmin}, {"C", cmax}};
  rep.pass = cmin > 0;
  return rep;
}

bool injectivity_sample(const QcMapping& map, double h, int pairs, std::uint64_t seed) {
  const auto& g = *map.f.grid;
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::abs(g.nodes[i]) < 1.0 - 2 * h) inside.push_back(i);
  std::mt19937_64 rng(splitmix(seed));
  std::uniform_int_distribution<std::size_t> pick(0, inside.size() - 1);
  for (int t = 0; t < pairs; ++t) {
    std::size_t i = inside[pick(rng)], j = inside[pick(rng)];
    if (std::abs(g.nodes[i] - g.nodes[j]) < 10 * h) continue;
    if (std::abs(map.f.values[i] - map.f.values[j]) < 1e-9) return false;
  }
  return true;
}

EstimateReport check_chain_pipeline(int n, std::uint64_t seed) {
  EstimateReport rep;
  rep.id = "chain-pipeline";
  rep.anchor = "(f_1)_wbar = mu (f_1)_w + mu_w f_1 + mu_ww; F = int e^g ds + mu e^g ds_bar; "
               "|F_ww/F_w| dist(w) small";
  rep.tol = 1e-3;
  int nn = std::min(n, 128);
  auto g = make_grid(GridKind::SquareLattice, nn, 1.25);
  auto mu = BeltramiCoefficient::from_rule(
      [](Complex z) {
        return 0.03 * (1.0 - std::norm(z)) * cap_bump(z, {0.0, 0.0}, 0.8);
      },
      g, 0.03);
  auto geom = DomainGeometry::disk();
  auto rule = ReflectionRule::disk_inversion();
  auto chain = derivative_chain_solve(mu, geom, rule, 1, 8);
  auto map = reconstruct_map(chain, mu, geom);
  double margin = univalence_margin(map, geom);
  bool inj = injectivity_sample(map, g->spacing(), 10000, seed);
  rep.measured = {{"chain_residual", chain.residuals[0]},
                  {"path_discrepancy", map.diagnostics.path_discrepancy},
                  {"univalence_margin", margin},
                  {"outer_iterations", static_cast<double>(chain.iterations)},
                  {"contraction", chain.contraction},
                  {"injectivity", inj ? 1.0 : 0.0}};
  rep.pass = chain.residuals[0] <= rep.tol && map.diagnostics.path_discrepancy <= rep.tol &&
             margin <= 0.5 && inj;
  return rep;
}

EstimateReport check_holder_slope(int, std::uint64_t) {
  EstimateReport rep;
  rep.id = "holder-slope";
  rep.anchor = "|f_(k)(z,t) - f_(k)(z,t+dt)| <= C (1-|z|)^{1-|(k)|} min{1, (dt)^beta (1-|z|)^{-s}}";
  rep.tol = 0;
  FamilySpec fam;
  fam.t_dim = 1;
  fam.box_lo = {0.0};
  fam.box_hi = {0.5};
  fam.d = 0.35;
  fam.param_growth = {{2.0, 1.0}};
  fam.rule = [](Complex z, std::span<const double> t) {
    return Complex{0.3, 0.15} * t[0] * cap_bump(z, {0.0, 0.0}, 0.8) * 2.0;
  };
  HolderOptions opts;
  opts.n = 64;
  opts.k = 0;
  std::vector<Complex> probes{{0.1, 0.0}, {0.3, 0.2}, {-0.25, 0.35}, {0.0, -0.45}};
  auto res = holder_modulus(fam, opts, probes);

  FamilySpec flat = fam;
  flat.rule = [](Complex z, std::span<const double>) {
    return Complex{0.25, 0.0} * cap_bump(z, {0.0, 0.0}, 0.8);
  };
  auto sat = holder_modulus(flat, opts, probes);

  rep.measured = {{"beta_min", res.beta_min},
                  {"r2_min", res.r2_min},
                  {"saturated_flag", sat.saturated ? 1.0 : 0.0}};
  rep.pass = res.beta_min > 0 && res.beta_min <= 1.05 && res.r2_min >= 0.9 && sat.saturated;
  return rep;
}

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"kz-norm", check_kz_norm},
      {"s-isometry", check_s_isometry},
      {"th-isometry", check_th_isometry},
      {"rightinv-cauchy", check_rightinv_cauchy},
      {"rightinv-cauchy-m", check_rightinv_cauchy_m},
      {"rightinv-strip", check_rightinv_strip},
      {"cm-weighted-sweep", check_cm_weighted},
      {"principal-closed-form", check_principal_closed_form},
      {"normal-fixed-points", check_normal_fixed_points},
      {"derivative-bounds", check_derivative_bounds},
      {"log-solution-bound", check_log_solution_bound},
      {"pm-disk-reduction", check_pm_disk_reduction},
      {"reflection-sandwich", check_reflection_sandwich},
      {"chain-pipeline", check_chain_pipeline},
      {"holder-slope", check_holder_slope},
  };
  return checks;
}

}  // namespace

const std::vector<std::string>& registered_checks() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

std::vector<EstimateReport> run_suite(const SuiteConfig& config) {
  std::vector<std::string> names = config.checks;
  if (names.size() == 1 && names[0] == "all") names = registered_checks();
  std::vector<EstimateReport> out;
  for (const auto& name : names) {
    auto it = std::find_if(registry().begin(), registry().end(),
                           [&](const auto& c) { return c.first == name; });
    if (it == registry().end())
      throw std::invalid_argument("run_suite: unknown check name '" + name + "'");
    auto t0 = std::chrono::steady_clock::now();
    EstimateReport rep = it->second(config.n, config.seed);
    rep.n = config.n;
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(rep));
  }
  return out;
}

void write_reports_jsonl(std::ostream& os, const std::vector<EstimateReport>& reports,
                         bool include_timing) {
  for (const auto& r : reports) {
    nlohmann::json j;
    j["id"] = r.id;
    j["anchor"] = r.anchor;
    j["measured"] = r.measured;
    j["tol"] = r.tol;
    j["pass"] = r.pass;
    j["n"] = r.n;
    if (include_timing) j["seconds"] = r.seconds;
    os << j.dump() << "\n";
  }
}

}  // namespace qbel
