// quasibel: construct Beltrami-equation solutions and run the estimate
// verification suite from the command line. All outputs are plain files
// (QBF-1 fields, JSON/JSON-lines reports, CSV polylines, portable graymaps).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "quasibel/expr.hpp"
#include "quasibel/norms.hpp"
#include "quasibel/params.hpp"
#include "quasibel/qbf.hpp"
#include "quasibel/render.hpp"
#include "quasibel/solver.hpp"
#include "quasibel/transforms.hpp"
#include "quasibel/verify.hpp"

namespace {

constexpr const char* kVersion = "quasibel 0.1.0";

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string provenance(int argc, char** argv) {
  std::string joined;
  for (int i = 0; i < argc; ++i) {
    joined += argv[i];
    joined += '\x1f';
  }
  std::ostringstream os;
  os << kVersion << " cfg=" << std::hex << fnv1a(joined);
  return os.str();
}

qbel::Backend parse_backend(const std::string& s) {
  if (s == "fft") return qbel::Backend::Fft;
  if (s == "direct") return qbel::Backend::Direct;
  return qbel::Backend::Auto;
}

qbel::BeltramiCoefficient coefficient_from_field(qbel::SampledField field) {
  double m = 0;
  for (const auto& v : field.values) m = std::max(m, std::abs(v));
  if (m >= 1.0)
    throw std::domain_error("coefficient field has sup " + std::to_string(m) + " >= 1");
  return qbel::BeltramiCoefficient::from_field(std::move(field), std::min(0.999, m + 1e-12));
}

int cmd_transform(const std::string& op, int m, const std::string& in, const std::string& out,
                  const std::string& backend, const std::string& prov) {
  auto f = qbel::read_qbf_file(in);
  qbel::Backend bk = parse_backend(backend);
  qbel::SampledField g;
  if (op == "cauchy")
    g = qbel::cauchy(f, bk);
  else if (op == "beurling")
    g = qbel::beurling(f, bk);
  else if (op == "cauchy_m")
    g = qbel::cauchy_m(f, m);
  else if (op == "beurling_m")
    g = qbel::beurling_m(f, m);
  else if (op == "strip_cauchy")
    g = qbel::strip_cauchy(f, bk);
  else if (op == "strip_beurling")
    g = qbel::strip_beurling(f, bk);
  else if (op == "domain_cauchy_m")
    g = qbel::domain_cauchy_m(f, qbel::DomainGeometry::disk(),
                              qbel::ReflectionRule::disk_inversion(), m);
  else if (op == "domain_beurling_m")
    g = qbel::domain_beurling_m(f, qbel::DomainGeometry::disk(),
                                qbel::ReflectionRule::disk_inversion(), m);
  else
    throw CLI::ValidationError("--op", "unknown operator family '" + op + "'");
  g.label = op + "(" + f.label + ")";
  qbel::write_qbf_file(out, g, prov);
  return 0;
}

int cmd_solve(const std::string& kind, const std::string& mu_path, int k, int m,
              const std::string& out, const std::string& report_path, double tol, bool exp_mode,
              const std::string& prov) {
  auto field = qbel::read_qbf_file(mu_path);
  qbel::SolveOptions opts;
  opts.residual_tol = tol;
  opts.exponential = exp_mode;

  nlohmann::json report;
  report["provenance"] = prov;
  report["kind"] = kind;

  qbel::QcMapping map;
  if (kind == "principal") {
    map = qbel::principal_solution(coefficient_from_field(std::move(field)), opts);
  } else if (kind == "normal") {
    qbel::mask_outside_disk(field);
    map = qbel::normal_solution(coefficient_from_field(std::move(field)), opts);
  } else if (kind == "log") {
    map = qbel::principal_log_solution(coefficient_from_field(std::move(field)), opts);
  } else if (kind == "chain") {
    qbel::mask_outside_disk(field);
    auto mu = coefficient_from_field(std::move(field));
    auto geom = qbel::DomainGeometry::disk();
    auto rule = qbel::ReflectionRule::disk_inversion();
    qbel::ChainOptions copts;
    copts.solve = opts;
    auto chain = qbel::derivative_chain_solve(mu, geom, rule, k, m, copts);
    map = qbel::reconstruct_map(chain, mu, geom, opts);
    report["chain"] = {{"levels", static_cast<int>(chain.levels.size())},
                       {"residuals", chain.residuals},
                       {"decay_exponents", chain.decay_exponents},
                       {"iterations", chain.iterations},
                       {"contraction", chain.contraction}};
    report["univalence_margin"] = qbel::univalence_margin(map, geom);
  } else {
    throw CLI::ValidationError("--kind", "unknown solve kind '" + kind + "'");
  }

  map.f.label = kind;
  qbel::write_qbf_file(out, map.f, prov);

  report["iterations"] = map.diagnostics.iterations;
  report["contraction"] = map.diagnostics.contraction;
  report["residual"] = map.diagnostics.residual;
  report["residual_fd"] = map.diagnostics.residual_fd;
  report["sup_deviation"] = map.diagnostics.sup_deviation;
  report["path_discrepancy"] = map.diagnostics.path_discrepancy;
  if (!report_path.empty()) {
    std::ofstream os(report_path);
    os << report.dump(2) << "\n";
  }
  return 0;
}

int cmd_family(const std::string& cmd, const std::string& spec_path, const std::string& out,
               int k, int n, const std::string& prov) {
  auto family = qbel::load_family_file(spec_path);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot open for writing: " + out);
  os << "# " << prov << "\n";

  if (cmd == "holder") {
    qbel::HolderOptions opts;
    opts.k = k;
    if (n > 0) opts.n = n;
    std::vector<qbel::Complex> probes{{0.1, 0.0}, {0.3, 0.2}, {-0.25, 0.35}, {0.0, -0.45}};
    auto res = qbel::holder_modulus(family, opts, probes);
    os << "# beta_min=" << res.beta_min << " r2_min=" << res.r2_min
       << " saturated=" << (res.saturated ? 1 : 0) << " low_r2=" << (res.low_r2 ? 1 : 0) << "\n";
    os << "probe_re,probe_im,dt,diff\n";
    for (const auto& row : res.table)
      os << row.probe.real() << "," << row.probe.imag() << "," << row.dt << "," << row.diff
         << "\n";
    return 0;
  }
  if (cmd == "mollify") {
    auto smooth = qbel::mollify_family(family, qbel::MollifierSchedule{}, k);
    os << "z_re,z_im,t1,orig_re,orig_im,smooth_re,smooth_im\n";
    std::vector<double> t(family.t_dim, 0.0);
    for (int it = 0; it <= 8; ++it) {
      t[0] = family.box_lo[0] + (family.box_hi[0] - family.box_lo[0]) * it / 8.0;
      for (double r : {0.2, 0.5, 0.8}) {
        qbel::Complex z = std::polar(r, 0.7);
        auto a = family.rule(z, t);
        auto b = smooth.rule(z, t);
        os << z.real() << "," << z.imag() << "," << t[0] << "," << a.real() << "," << a.imag()
           << "," << b.real() << "," << b.imag() << "\n";
      }
    }
    return 0;
  }
  throw CLI::ValidationError("--cmd", "unknown family command '" + cmd + "'");
}

int cmd_verify(const std::string& suite, int n, std::uint64_t seed, const std::string& out,
               const std::string& prov) {
  qbel::SuiteConfig cfg;
  cfg.n = n;
  cfg.seed = seed;
  std::stringstream ss(suite);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) cfg.checks.push_back(item);
  auto reports = qbel::run_suite(cfg);
  bool all_pass = true;
  for (const auto& r : reports) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.id << " (n=" << r.n << ", " << r.seconds
              << " s)\n";
    all_pass = all_pass && r.pass;
  }
  if (!out.empty()) {
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot open for writing: " + out);
    os << "{\"provenance\":\"" << prov << "\"}\n";
    qbel::write_reports_jsonl(os, reports, true);
  }
  return all_pass ? 0 : 1;
}

int cmd_render(const std::string& in, const std::string& mode, const std::string& out, int stride,
               bool log_scale, const std::string& prov) {
  auto f = qbel::read_qbf_file(in);
  std::ofstream os(out);
  if (!os) throw std::runtime_error("cannot open for writing: " + out);
  if (mode == "grid") {
    os << "# " << prov << "\n";
    qbel::render_grid_csv(os, f, stride);
  } else if (mode == "heat") {
    qbel::render_heat_pgm(os, f, log_scale);
    os << "# " << prov << "\n";
  } else {
    throw CLI::ValidationError("--mode", "unknown render mode '" + mode + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Beltrami-equation solution toolkit"};
  app.require_subcommand(1);
  std::string prov = provenance(argc, argv);

  auto* t = app.add_subcommand("transform", "apply a singular integral operator to a field");
  std::string t_op, t_in, t_out, t_backend = "auto";
  int t_m = 0;
  t->add_option("--op", t_op, "operator family")->required();
  t->add_option("--m", t_m, "counter-term order");
  t->add_option("--in", t_in, "input QBF-1 field")->required();
  t->add_option("--out", t_out, "output QBF-1 field")->required();
  t->add_option("--backend", t_backend, "fft|direct|auto");

  auto* s = app.add_subcommand("solve", "construct a solution mapping");
  std::string s_kind, s_mu, s_out, s_report;
  int s_k = 1, s_m = 8;
  double s_tol = 1e-3;
  bool s_exp = false;
  s->add_option("--kind", s_kind, "principal|normal|log|chain")->required();
  s->add_option("--mu", s_mu, "coefficient field (QBF-1)")->required();
  s->add_option("--k", s_k, "chain depth");
  s->add_option("--m", s_m, "counter-term order");
  s->add_option("--out", s_out, "output mapping (QBF-1)")->required();
  s->add_option("--report", s_report, "diagnostics report (JSON)");
  s->add_option("--tol", s_tol, "residual tolerance");
  s->add_flag("--exp", s_exp, "exponential-form principal solution");

  auto* fam = app.add_subcommand("family", "parameter-family operations");
  std::string f_cmd, f_spec, f_out;
  int f_k = 0, f_n = 0;
  fam->add_option("--cmd", f_cmd, "holder|mollify")->required();
  fam->add_option("--spec", f_spec, "family spec (JSON)")->required();
  fam->add_option("--out", f_out, "output table (CSV)")->required();
  fam->add_option("--k", f_k, "derivative order (holder) / mollifier order (mollify)");
  fam->add_option("--n", f_n, "lattice size for the solves");

  auto* v = app.add_subcommand("verify", "run estimate checks");
  std::string v_suite = "all", v_out;
  int v_n = 128;
  std::uint64_t v_seed = 7;
  v->add_option("--suite", v_suite, "all or comma-separated check names");
  v->add_option("--n", v_n, "lattice size");
  v->add_option("--seed", v_seed, "random seed");
  v->add_option("--out", v_out, "JSON-lines report file");

  auto* r = app.add_subcommand("render", "emit plots as CSV or graymap");
  std::string r_in, r_mode = "grid", r_out;
  int r_stride = 8;
  bool r_log = false;
  r->add_option("--in", r_in, "input QBF-1 field")->required();
  r->add_option("--mode", r_mode, "grid|heat");
  r->add_option("--out", r_out, "output file")->required();
  r->add_option("--stride", r_stride, "gridline stride (grid mode)");
  r->add_flag("--log", r_log, "log intensity scale (heat mode)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    app.exit(e);
    return 2;
  }

  try {
    if (t->parsed()) return cmd_transform(t_op, t_m, t_in, t_out, t_backend, prov);
    if (s->parsed()) return cmd_solve(s_kind, s_mu, s_k, s_m, s_out, s_report, s_tol, s_exp, prov);
    if (fam->parsed()) return cmd_family(f_cmd, f_spec, f_out, f_k, f_n, prov);
    if (v->parsed()) return cmd_verify(v_suite, v_n, v_seed, v_out, prov);
    if (r->parsed()) return cmd_render(r_in, r_mode, r_out, r_stride, r_log, prov);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
