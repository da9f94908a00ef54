#include "quasibel/transforms.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "quasibel/fft.hpp"

// Discretization notes.
//
// The plane and strip convolution families are defined through their analytic
// Fourier symbols on a zero-padded lattice:
//
//   cauchy    C-hat(xi)  = -2i / xi_c,           xi_c = xi_x + i xi_y
//   beurling  S-hat(xi)  = conj(xi_c) / xi_c
//   P_H-hat(w,k) = 2 / (iw - k),   T_H-hat(w,k) = (iw + k) / (iw - k)
//
// The padding (4x the grid side, 4x the xi window) makes the circular
// convolution a linear one for every in-grid source/target pair, so the fft
// and direct backends compute the identical discrete operator; direct just
// convolves the inverse-transformed kernel table in real space. The removed
// mean mode is restored analytically: cauchy adds (m0 / L^2) conj(z) and
// strip_cauchy adds the ramp 2 (m0 / A) (xi - xi_lo), both of which satisfy
// dbar(term) = removed constant. The beurling symbol has unit modulus, which
// is what makes the discrete L^2 isometry exact, and the kernel table
// synthesized from it keeps the principal-value property table[0] = 0 by the
// quarter-turn symmetry of the symbol.

namespace qbel {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPad = 4;

using CVec = std::vector<Complex>;

Complex ipow(Complex base, int e) {
  Complex r{1.0, 0.0};
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

double max_abs(const SampledField& f) {
  double m = 0;
  for (const auto& v : f.values) m = std::max(m, std::abs(v));
  return m;
}

void require_square(const SampledField& f, const char* who) {
  if (!f.grid || f.grid->kind != GridKind::SquareLattice)
    throw std::invalid_argument(std::string(who) + ": requires a square lattice");
}

void require_strip(const SampledField& f, const char* who) {
  if (!f.grid || f.grid->kind != GridKind::StripPeriodic)
    throw std::invalid_argument(std::string(who) + ": requires a strip grid");
}

void require_disk_support(const SampledField& f, const char* who) {
  double m = max_abs(f);
  double tol = 1e-12 * (m > 0 ? m : 1.0);
  for (std::size_t i = 0; i < f.size(); ++i)
    if (std::abs(f.values[i]) > tol && std::abs(f.grid->nodes[i]) >= 1.0)
      throw std::invalid_argument(std::string(who) + ": field supported outside D");
}

// fft-backend aliasing guard: compactly supported input must not touch the
// lattice boundary.
void check_boundary_support(const SampledField& f, const char* who) {
  const auto& g = *f.grid;
  double m = max_abs(f);
  if (m == 0) return;
  double tol = 1e-12 * m;
  int n = g.n;
  for (int i = 0; i < n; ++i) {
    if (std::abs(f.values[g.index(i, 0)]) > tol || std::abs(f.values[g.index(i, n - 1)]) > tol ||
        std::abs(f.values[g.index(0, i)]) > tol || std::abs(f.values[g.index(n - 1, i)]) > tol)
      throw std::invalid_argument(std::string(who) +
                                  ": support touches the grid boundary (aliasing risk)");
  }
}

enum class PlaneSymbol { Cauchy, Beurling, Dz, Dzbar };

void fill_plane_symbol(CVec& sym, int N, double h, PlaneSymbol which) {
  sym.assign(static_cast<std::size_t>(N) * N, Complex{0, 0});
  double base = 2.0 * kPi / (N * h);
  for (int iy = 0; iy < N; ++iy) {
    int ky = iy < N / 2 ? iy : iy - N;
    double xy = base * ky;
    for (int ix = 0; ix < N; ++ix) {
      int kx = ix < N / 2 ? ix : ix - N;
      double xx = base * kx;
      Complex xic{xx, xy};
      Complex v{0, 0};
      if (kx != 0 || ky != 0) {
        switch (which) {
          case PlaneSymbol::Cauchy:
            v = Complex{0, -2.0} / xic;
            break;
          case PlaneSymbol::Beurling:
            v = std::conj(xic) / xic;
            break;
          case PlaneSymbol::Dz:
            v = Complex{0, 0.5} * std::conj(xic);
            break;
          case PlaneSymbol::Dzbar:
            v = Complex{0, 0.5} * xic;
            break;
        }
      } else if (which == PlaneSymbol::Dz || which == PlaneSymbol::Dzbar) {
        v = Complex{0, 0};
      }
      sym[static_cast<std::size_t>(iy) * N + ix] = v;
    }
  }
}

enum class StripSymbol { PH, TH, Dz, Dzbar };

void fill_strip_symbol(CVec& sym, int Nx, int Ny, double hx, StripSymbol which) {
  sym.assign(static_cast<std::size_t>(Nx) * Ny, Complex{0, 0});
  double wbase = 2.0 * kPi / (Nx * hx);
  for (int iy = 0; iy < Ny; ++iy) {
    int k = iy < Ny / 2 ? iy : iy - Ny;  // integer phi wavenumber
    for (int ix = 0; ix < Nx; ++ix) {
      int kw = ix < Nx / 2 ? ix : ix - Nx;
      double w = wbase * kw;
      Complex iw{0, w};
      Complex v{0, 0};
      bool dc = (k == 0 && kw == 0);
      switch (which) {
        case StripSymbol::PH:
          v = dc ? Complex{0, 0} : 2.0 / (iw - static_cast<double>(k));
          break;
        case StripSymbol::TH:
          // the phi-averaged sector is fixed by T_H = Id on phi-independent
          // fields, so the ambiguous (0,0) mode takes the k = 0 row limit 1
          v = dc ? Complex{1, 0}
                 : (iw + static_cast<double>(k)) / (iw - static_cast<double>(k));
          break;
        case StripSymbol::Dz:
          v = 0.5 * (iw + static_cast<double>(k));
          break;
        case StripSymbol::Dzbar:
          v = 0.5 * (iw - static_cast<double>(k));
          break;
      }
      sym[static_cast<std::size_t>(iy) * Nx + ix] = v;
    }
  }
}

// Circular convolution of the padded input against the symbol, either in the
// Fourier domain or in real space with the inverse-transformed kernel table.
// The direct backend only evaluates the requested targets (grid block plus
// the gauge-anchor band); both backends produce the identical discrete values.
CVec convolve(const CVec& padded, int Nx, int Ny, const CVec& sym, Backend backend,
              const std::vector<std::pair<int, int>>& targets) {
  if (backend != Backend::Direct) {
    CVec buf = padded;
    fft2(buf, Nx, Ny, false);
    for (std::size_t i = 0; i < buf.size(); ++i) buf[i] *= sym[i];
    fft2(buf, Nx, Ny, true);
    double scale = 1.0 / (static_cast<double>(Nx) * Ny);
    for (auto& v : buf) v *= scale;
    return buf;
  }
  // kernel table = IDFT of the symbol
  CVec table = sym;
  fft2(table, Nx, Ny, true);
  double scale = 1.0 / (static_cast<double>(Nx) * Ny);
  for (auto& v : table) v *= scale;

  struct Src {
    int ix, iy;
    Complex q;
  };
  std::vector<Src> sources;
  for (int iy = 0; iy < Ny; ++iy)
    for (int ix = 0; ix < Nx; ++ix) {
      Complex q = padded[static_cast<std::size_t>(iy) * Nx + ix];
      if (q != Complex{0, 0}) sources.push_back({ix, iy, q});
    }

  CVec out(padded.size(), Complex{0, 0});
  parallel_for(targets.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      auto [ix, iy] = targets[t];
      Complex acc{0, 0};
      for (const auto& s : sources) {
        int dx = ix - s.ix;
        if (dx < 0) dx += Nx;
        int dy = iy - s.iy;
        if (dy < 0) dy += Ny;
        acc += s.q * table[static_cast<std::size_t>(dy) * Nx + dx];
      }
      out[static_cast<std::size_t>(iy) * Nx + ix] = acc;
    }
  });
  return out;
}

// Minimal-image coordinate of a padded-lattice node; the grid occupies the
// leading n x n block with coordinates in [-a, a].
inline double wrapped_coord(int i, double a, double h, double L) {
  double x = -a + (i + 0.5) * h;
  return x - L * std::round(x / L);
}

SampledField plane_convolution(const SampledField& f, PlaneSymbol which, Backend backend,
                               const char* who) {
  require_square(f, who);
  bool transform = which == PlaneSymbol::Cauchy || which == PlaneSymbol::Beurling;
  if (transform && backend != Backend::Direct) check_boundary_support(f, who);
  const auto& g = *f.grid;
  const int n = g.n;
  const int N = kPad * n;
  const double h = g.hx;
  const double a = g.extent;
  const double L = N * h;

  CVec padded(static_cast<std::size_t>(N) * N, Complex{0, 0});
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      padded[static_cast<std::size_t>(iy) * N + ix] = f.values[g.index(ix, iy)];

  // gauge-anchor band: a symmetric ring of the padded torus, clear of both
  // the grid and the wrap seam, where the analytic far field is known
  std::vector<std::pair<int, int>> anchor;
  if (transform) {
    for (int iy = 0; iy < N; iy += 4)
      for (int ix = 0; ix < N; ix += 4) {
        double xm = wrapped_coord(ix, a, h, L);
        double ym = wrapped_coord(iy, a, h, L);
        double m = std::max(std::abs(xm), std::abs(ym));
        if (m >= 0.25 * L && m <= 0.375 * L) anchor.emplace_back(ix, iy);
      }
  }

  std::vector<std::pair<int, int>> targets;
  targets.reserve(static_cast<std::size_t>(n) * n + anchor.size());
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) targets.emplace_back(ix, iy);
  targets.insert(targets.end(), anchor.begin(), anchor.end());

  CVec sym;
  fill_plane_symbol(sym, N, h, which);
  CVec res = convolve(padded, N, N, sym, backend, targets);

  SampledField out(f.grid, f.label);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out.values[g.index(ix, iy)] = res[static_cast<std::size_t>(iy) * N + ix];

  if (transform) {
    Complex m0{0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) m0 += f.values[i];
    m0 *= h * h;
    Complex mbar = m0 / (L * L);

    // anchor the additive constant to the analytic far field:
    // cauchy ~ (m0/pi)/z + mbar conj(z), beurling ~ -(m0/pi)/z^2
    Complex mean_raw{0, 0}, mean_far{0, 0};
    for (auto [ix, iy] : anchor) {
      mean_raw += res[static_cast<std::size_t>(iy) * N + ix];
      Complex zm{wrapped_coord(ix, a, h, L), wrapped_coord(iy, a, h, L)};
      if (which == PlaneSymbol::Cauchy)
        mean_far += (m0 / kPi) / zm + mbar * std::conj(zm);
      else
        mean_far += -(m0 / kPi) / (zm * zm);
    }
    Complex c0 = anchor.empty() ? Complex{0, 0}
                                : (mean_far - mean_raw) / static_cast<double>(anchor.size());
    if (which == PlaneSymbol::Cauchy) {
      for (std::size_t i = 0; i < f.size(); ++i)
        out.values[i] += mbar * std::conj(g.nodes[i]) + c0;
    } else {
      for (std::size_t i = 0; i < f.size(); ++i) out.values[i] += c0;
    }
  }
  return out;
}

SampledField strip_convolution(const SampledField& f, StripSymbol which, Backend backend,
                               const char* who) {
  require_strip(f, who);
  const auto& g = *f.grid;
  const int n = g.n;
  const int Nx = kPad * n;
  const double hx = g.hx;
  const double Lx = Nx * hx;
  (void)who;

  CVec padded(static_cast<std::size_t>(Nx) * n, Complex{0, 0});
  for (int ip = 0; ip < n; ++ip)
    for (int ix = 0; ix < n; ++ix)
      padded[static_cast<std::size_t>(ip) * Nx + ix] = f.values[g.index(ix, ip)];

  // wrapped xi of a padded column; the window occupies columns [0, n)
  auto xi_wrapped = [&](int ix) {
    double xi = g.xi_lo + (ix + 0.5) * hx;
    double center = g.xi_lo + 0.5 * (g.xi_hi - g.xi_lo);
    return xi - Lx * std::round((xi - center) / Lx);
  };

  // deep-left band, where P_H / T_H of window-supported data decays to zero
  bool transform = which == StripSymbol::PH || which == StripSymbol::TH;
  std::vector<std::pair<int, int>> anchor;
  if (transform) {
    for (int ix = 0; ix < Nx; ix += 2) {
      double xm = xi_wrapped(ix);
      if (xm >= g.xi_lo - 0.375 * Lx && xm <= g.xi_lo - 0.25 * Lx)
        for (int ip = 0; ip < n; ip += 2) anchor.emplace_back(ix, ip);
    }
  }

  std::vector<std::pair<int, int>> targets;
  for (int ip = 0; ip < n; ++ip)
    for (int ix = 0; ix < n; ++ix) targets.emplace_back(ix, ip);
  targets.insert(targets.end(), anchor.begin(), anchor.end());

  CVec sym;
  fill_strip_symbol(sym, Nx, n, hx, which);
  CVec res = convolve(padded, Nx, n, sym, backend, targets);

  SampledField out(f.grid, f.label);
  for (int ip = 0; ip < n; ++ip)
    for (int ix = 0; ix < n; ++ix)
      out.values[g.index(ix, ip)] = res[static_cast<std::size_t>(ip) * Nx + ix];

  if (transform) {
    Complex m0{0, 0};
    for (std::size_t i = 0; i < f.size(); ++i) m0 += f.values[i];
    m0 *= g.hx * g.hy;
    Complex mbar = m0 / (2.0 * kPi * Lx);

    Complex mean_raw{0, 0};
    double mean_xi = 0;
    for (auto [ix, ip] : anchor) {
      mean_raw += res[static_cast<std::size_t>(ip) * Nx + ix];
      mean_xi += xi_wrapped(ix);
    }
    if (!anchor.empty()) {
      mean_raw /= static_cast<double>(anchor.size());
      mean_xi /= static_cast<double>(anchor.size());
    }
    if (which == StripSymbol::PH) {
      // P_H v - u_raw = 2 mbar xi + c, fixed by v ~ 0 on the deep left
      Complex c = -mean_raw - 2.0 * mbar * mean_xi;
      for (std::size_t i = 0; i < f.size(); ++i)
        out.values[i] += 2.0 * mbar * g.nodes[i].real() + c;
    } else {
      Complex c = -mean_raw;
      for (std::size_t i = 0; i < f.size(); ++i) out.values[i] += c;
    }
  }
  return out;
}

// ---- exact cell integrals of the singular factors ----

constexpr int kNearRadius = 8;

struct NearTables {
  // index (dy + R) * (2R+1) + (dx + R)
  std::vector<Complex> c1;  // (1/pi) Int dA / (d - t) over the unit cell
  std::vector<Complex> c2;  // (-1/pi) Int dA / (d - t)^2
};

const NearTables& near_tables() {
  static const NearTables tables = [] {
    constexpr int R = kNearRadius;
    constexpr int W = 2 * R + 1;
    constexpr int Q = 24;
    // Gauss-Legendre nodes/weights on [-1/2, 1/2], computed by Newton on P_Q.
    std::array<double, Q> gx{}, gw{};
    for (int i = 0; i < Q; ++i) {
      double x = std::cos(kPi * (i + 0.75) / (Q + 0.5));
      for (int it = 0; it < 64; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int j = 0; j < Q; ++j) {
          double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
        }
        double dp = Q * (x * p0 - p1) / (x * x - 1.0);
        double dx = p0 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < Q; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      double dp = Q * (x * p0 - p1) / (x * x - 1.0);
      gx[i] = 0.5 * x;
      gw[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    NearTables t;
    t.c1.assign(W * W, Complex{0, 0});
    t.c2.assign(W * W, Complex{0, 0});
    for (int dy = -R; dy <= R; ++dy)
      for (int dx = -R; dx <= R; ++dx) {
        if (dx == 0 && dy == 0) continue;  // principal value, zero by symmetry
        Complex d{static_cast<double>(dx), static_cast<double>(dy)};
        Complex s1{0, 0}, s2{0, 0};
        for (int a = 0; a < Q; ++a)
          for (int b = 0; b < Q; ++b) {
            Complex t0 = d - Complex{gx[a], gx[b]};
            double wgt = gw[a] * gw[b];
            s1 += wgt / t0;
            s2 += wgt / (t0 * t0);
          }
        t.c1[(dy + R) * W + (dx + R)] = s1 / kPi;
        t.c2[(dy + R) * W + (dx + R)] = -s2 / kPi;
      }
    return t;
  }();
  return tables;
}

}  // namespace

Complex cell_integral_cauchy(int dx, int dy) {
  constexpr int R = kNearRadius;
  if (std::abs(dx) > R || std::abs(dy) > R)
    throw std::out_of_range("cell integral table covers offsets up to 8");
  return near_tables().c1[(dy + R) * (2 * R + 1) + (dx + R)];
}

Complex cell_integral_beurling(int dx, int dy) {
  constexpr int R = kNearRadius;
  if (std::abs(dx) > R || std::abs(dy) > R)
    throw std::out_of_range("cell integral table covers offsets up to 8");
  return near_tables().c2[(dy + R) * (2 * R + 1) + (dx + R)];
}

namespace {

// ---- scattered-sum engine for the counter-term families ----

struct ReflectedSource {
  Complex w;     // source point in Omega
  Complex what;  // reflected source point
  Complex q;     // field value times quadrature weight (without 1/pi)
  Complex pref;  // (w - what)^m, precomputed
  int ix = -1, iy = -1;
};

// P_m / T_m sums. Sources and targets on a common lattice get exact cell
// integrals of the singular factor within the near radius; the reflected
// factor is smooth there and is frozen at the cell center.
SampledField reflected_sum(const SampledField& f, const std::vector<ReflectedSource>& sources,
                           const std::vector<std::size_t>& targets, int m, bool beurling_kind,
                           bool on_lattice, double h) {
  const auto& g = *f.grid;
  SampledField out(f.grid, f.label);
  const NearTables& nt = near_tables();
  constexpr int R = kNearRadius;
  constexpr int W = 2 * R + 1;

  parallel_for(targets.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      std::size_t ti = targets[t];
      Complex z = g.nodes[ti];
      int tix = static_cast<int>(ti) % g.n;
      int tiy = static_cast<int>(ti) / g.n;
      Complex acc{0, 0};
      for (const auto& s : sources) {
        Complex dzw = z - s.w;
        Complex dzh = z - s.what;
        Complex ratio_m = m == 0 ? Complex{1, 0} : s.pref / ipow(dzh, m);
        bool near = false;
        int dx = 0, dy = 0;
        if (on_lattice) {
          dx = tix - s.ix;
          dy = tiy - s.iy;
          near = std::abs(dx) <= R && std::abs(dy) <= R;
        }
        if (near) {
          if (dx == 0 && dy == 0) continue;  // PV cell, exactly zero
          Complex kc = h * nt.c1[(dy + R) * W + (dx + R)];
          if (!beurling_kind) {
            acc += s.q / (h * h) * ratio_m * kc;
          } else {
            Complex kb = nt.c2[(dy + R) * W + (dx + R)];
            acc += s.q / (h * h) * ratio_m *
                   (kb - static_cast<double>(m) / dzh * kc);
          }
        } else {
          if (dzw == Complex{0, 0}) continue;
          if (!beurling_kind) {
            acc += s.q / dzw * ratio_m / kPi;
          } else {
            acc += -s.q * ratio_m / kPi * (1.0 / (dzw * dzw) + static_cast<double>(m) / (dzw * dzh));
          }
        }
      }
      out.values[ti] = acc;
    }
  });
  return out;
}

SampledField disk_counterterm(const SampledField& f, int m, bool beurling_kind, const char* who) {
  require_square(f, who);
  require_disk_support(f, who);
  if (m < 0) throw std::invalid_argument(std::string(who) + ": m must be >= 0");
  if (m == 0) return beurling_kind ? beurling(f) : cauchy(f);

  const auto& g = *f.grid;
  const double h = g.hx;
  std::vector<ReflectedSource> sources;
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Complex zeta = g.nodes[i];
    if (std::abs(zeta) >= 1.0) continue;
    targets.push_back(i);
    if (f.values[i] != Complex{0, 0}) {
      ReflectedSource s;
      s.w = zeta;
      s.what = 1.0 / std::conj(zeta);
      s.q = f.values[i] * h * h;
      s.pref = ipow(s.w - s.what, m);
      s.ix = static_cast<int>(i) % g.n;
      s.iy = static_cast<int>(i) / g.n;
      sources.push_back(s);
    }
  }
  return reflected_sum(f, sources, targets, m, beurling_kind, true, h);
}

SampledField domain_counterterm(const SampledField& f, const DomainGeometry& geometry,
                                const ReflectionRule& rule, int m, bool beurling_kind,
                                const char* who) {
  require_square(f, who);
  if (m < 0) throw std::invalid_argument(std::string(who) + ": m must be >= 0");

  if (geometry.kind == GeometryKind::Disk && rule.mode == ReflectionMode::DiskInversion) {
    require_disk_support(f, who);
    if (m == 0) return beurling_kind ? beurling(f) : cauchy(f);
    const auto& g = *f.grid;
    const double h = g.hx;
    std::vector<ReflectedSource> sources;
    std::vector<std::size_t> targets;
    for (std::size_t i = 0; i < f.size(); ++i) {
      Complex zeta = g.nodes[i];
      if (std::abs(zeta) >= 1.0) continue;
      targets.push_back(i);
      if (f.values[i] != Complex{0, 0}) {
        ReflectedSource s;
        s.w = zeta;
        s.what = reflect(rule, zeta);
        s.q = f.values[i] * h * h;
        s.pref = ipow(s.w - s.what, m);
        s.ix = static_cast<int>(i) % g.n;
        s.iy = static_cast<int>(i) / g.n;
        sources.push_back(s);
      }
    }
    return reflected_sum(f, sources, targets, m, beurling_kind, true, h);
  }

  if (geometry.kind != GeometryKind::Quasidisk || rule.mode != ReflectionMode::PullbackThroughMap)
    throw std::invalid_argument(std::string(who) +
                                ": domain transforms need disk inversion or a pullback chart");

  // Pullback quadrature through the chart g: sources/targets at w = g(zeta),
  // area element |g_zeta|^2 (1 - |nu|^2) h^2. The chart derivative comes from
  // centered differences of the forward map.
  const auto& g = *f.grid;
  const double h = g.hx;
  const auto& fwd = rule.map_forward;
  std::vector<ReflectedSource> sources;
  std::vector<std::size_t> targets;
  std::vector<Complex> target_w;
  for (std::size_t i = 0; i < f.size(); ++i) {
    Complex zeta = g.nodes[i];
    if (std::abs(zeta) >= 1.0) {
      if (f.values[i] != Complex{0, 0})
        throw std::invalid_argument(std::string(who) + ": field supported outside the chart disk");
      continue;
    }
    targets.push_back(i);
    if (f.values[i] != Complex{0, 0}) {
      double step = 0.5 * h;
      Complex gx = (fwd(zeta + step) - fwd(zeta - step)) / (2.0 * step);
      Complex gy = (fwd(zeta + Complex{0, step}) - fwd(zeta - Complex{0, step})) / (2.0 * step);
      Complex gz = 0.5 * (gx - Complex{0, 1} * gy);
      Complex gzb = 0.5 * (gx + Complex{0, 1} * gy);
      double jac = std::norm(gz) - std::norm(gzb);  // |g_z|^2 (1 - |nu|^2)
      if (jac <= 0) throw std::domain_error(std::string(who) + ": chart Jacobian not positive");
      ReflectedSource s;
      s.w = fwd(zeta);
      s.what = exterior_extension(fwd, 1.0 / std::conj(zeta));
      s.q = f.values[i] * jac * h * h;
      s.pref = ipow(s.w - s.what, m);
      sources.push_back(s);
    }
  }

  // evaluate at w_i = g(zeta_i); self pairs are skipped (distorted-cell PV)
  SampledField out(f.grid, f.label);
  parallel_for(targets.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t t = lo; t < hi; ++t) {
      std::size_t ti = targets[t];
      Complex w = fwd(g.nodes[ti]);
      Complex acc{0, 0};
      for (const auto& s : sources) {
        Complex dzw = w - s.w;
        if (std::abs(dzw) < 1e-14) continue;
        Complex dzh = w - s.what;
        Complex ratio_m = m == 0 ? Complex{1, 0} : s.pref / ipow(dzh, m);
        if (!beurling_kind)
          acc += s.q / dzw * ratio_m / kPi;
        else
          acc += -s.q * ratio_m / kPi * (1.0 / (dzw * dzw) + static_cast<double>(m) / (dzw * dzh));
      }
      out.values[ti] = acc;
    }
  });
  return out;
}

}  // namespace

OperatorSpec::OperatorSpec(OperatorFamily fam, int m_, DomainGeometry geom, Backend bk)
    : family(fam), m(m_), geometry(std::move(geom)), backend(bk) {
  if (m < 0) throw std::invalid_argument("operator counter-term order m must be >= 0");
  bool plain = family == OperatorFamily::Cauchy || family == OperatorFamily::Beurling ||
               family == OperatorFamily::StripCauchy || family == OperatorFamily::StripBeurling;
  if (plain && m != 0) throw std::invalid_argument("m = 0 is forced for the plain families");
  bool strip = family == OperatorFamily::StripCauchy || family == OperatorFamily::StripBeurling;
  if (strip && geometry.kind != GeometryKind::StripPeriodic)
    throw std::invalid_argument("strip families require strip geometry");
}

SampledField cauchy(const SampledField& f, Backend backend) {
  return plane_convolution(f, PlaneSymbol::Cauchy, backend, "cauchy");
}

SampledField beurling(const SampledField& f, Backend backend) {
  return plane_convolution(f, PlaneSymbol::Beurling, backend, "beurling");
}

SampledField strip_cauchy(const SampledField& f, Backend backend) {
  return strip_convolution(f, StripSymbol::PH, backend, "strip_cauchy");
}

SampledField strip_beurling(const SampledField& f, Backend backend) {
  return strip_convolution(f, StripSymbol::TH, backend, "strip_beurling");
}

SampledField cauchy_m(const SampledField& f, int m) {
  return disk_counterterm(f, m, false, "cauchy_m");
}

SampledField beurling_m(const SampledField& f, int m) {
  return disk_counterterm(f, m, true, "beurling_m");
}

SampledField domain_cauchy_m(const SampledField& f, const DomainGeometry& geometry,
                             const ReflectionRule& rule, int m) {
  return domain_counterterm(f, geometry, rule, m, false, "domain_cauchy_m");
}

SampledField domain_beurling_m(const SampledField& f, const DomainGeometry& geometry,
                               const ReflectionRule& rule, int m) {
  return domain_counterterm(f, geometry, rule, m, true, "domain_beurling_m");
}

SampledField apply_operator(const OperatorSpec& spec, const SampledField& f,
                            const std::optional<ReflectionRule>& rule) {
  switch (spec.family) {
    case OperatorFamily::Cauchy:
      return cauchy(f, spec.backend);
    case OperatorFamily::Beurling:
      return beurling(f, spec.backend);
    case OperatorFamily::CauchyM:
      return cauchy_m(f, spec.m);
    case OperatorFamily::BeurlingM:
      return beurling_m(f, spec.m);
    case OperatorFamily::StripCauchy:
      return strip_cauchy(f, spec.backend);
    case OperatorFamily::StripBeurling:
      return strip_beurling(f, spec.backend);
    case OperatorFamily::DomainCauchyM:
      if (!rule) throw std::invalid_argument("domain transform needs a reflection rule");
      return domain_cauchy_m(f, spec.geometry, *rule, spec.m);
    case OperatorFamily::DomainBeurlingM:
      if (!rule) throw std::invalid_argument("domain transform needs a reflection rule");
      return domain_beurling_m(f, spec.geometry, *rule, spec.m);
    case OperatorFamily::Zero: {
      SampledField out(f.grid, f.label);
      return out;
    }
  }
  throw std::invalid_argument("unknown operator family");
}

SampledField spectral_dz(const SampledField& f) {
  if (f.grid->kind == GridKind::StripPeriodic)
    return strip_convolution(f, StripSymbol::Dz, Backend::Fft, "spectral_dz");
  return plane_convolution(f, PlaneSymbol::Dz, Backend::Fft, "spectral_dz");
}

SampledField spectral_dzbar(const SampledField& f) {
  if (f.grid->kind == GridKind::StripPeriodic)
    return strip_convolution(f, StripSymbol::Dzbar, Backend::Fft, "spectral_dzbar");
  return plane_convolution(f, PlaneSymbol::Dzbar, Backend::Fft, "spectral_dzbar");
}

namespace {

// one-dimensional differentiation along rows/columns with edge handling
void fd_axis(const SampledField& f, bool along_x, int order, bool periodic, CVec& out) {
  const auto& g = *f.grid;
  int n = g.n;
  double h = along_x ? g.hx : g.hy;
  out.assign(f.size(), Complex{0, 0});
  auto at = [&](int ix, int iy) -> Complex {
    if (periodic && !along_x) iy = (iy % n + n) % n;
    if (periodic && along_x) ix = (ix % n + n) % n;
    return f.values[g.index(ix, iy)];
  };
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      int i = along_x ? ix : iy;
      Complex d;
      auto val = [&](int off) { return along_x ? at(ix + off, iy) : at(ix, iy + off); };
      bool interior4 = periodic || (i >= 2 && i <= n - 3);
      bool interior2 = periodic || (i >= 1 && i <= n - 2);
      if (order >= 4 && interior4) {
        d = (-val(2) + 8.0 * val(1) - 8.0 * val(-1) + val(-2)) / (12.0 * h);
      } else if (interior2) {
        d = (val(1) - val(-1)) / (2.0 * h);
      } else if (i == 0) {
        d = (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h);
      } else {
        d = (3.0 * val(0) - 4.0 * val(-1) + val(-2)) / (2.0 * h);
      }
      out[g.index(ix, iy)] = d;
    }
  }
}

}  // namespace

SampledField fd_dz(const SampledField& f, int order) {
  bool strip = f.grid->kind == GridKind::StripPeriodic;
  CVec dx, dy;
  fd_axis(f, true, order, false, dx);
  fd_axis(f, false, order, strip, dy);
  SampledField out(f.grid, f.label);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = 0.5 * (dx[i] - Complex{0, 1} * dy[i]);
  return out;
}

SampledField fd_dzbar(const SampledField& f, int order) {
  bool strip = f.grid->kind == GridKind::StripPeriodic;
  CVec dx, dy;
  fd_axis(f, true, order, false, dx);
  fd_axis(f, false, order, strip, dy);
  SampledField out(f.grid, f.label);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = 0.5 * (dx[i] + Complex{0, 1} * dy[i]);
  return out;
}

}  // namespace qbel
