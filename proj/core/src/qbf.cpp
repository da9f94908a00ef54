#include "quasibel/qbf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qbel {

namespace {

const char* kind_name(GridKind k) {
  switch (k) {
    case GridKind::SquareLattice:
      return "square-lattice";
    case GridKind::PolarDisk:
      return "polar-disk";
    case GridKind::StripPeriodic:
      return "strip-periodic";
  }
  return "?";
}

GridKind kind_from(const std::string& s) {
  if (s == "square-lattice") return GridKind::SquareLattice;
  if (s == "polar-disk") return GridKind::PolarDisk;
  if (s == "strip-periodic") return GridKind::StripPeriodic;
  throw std::invalid_argument("QBF: unknown grid kind '" + s + "'");
}

void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace

void write_qbf(std::ostream& os, const SampledField& field, const std::string& provenance) {
  const auto& g = *field.grid;
  nlohmann::json header;
  header["kind"] = kind_name(g.kind);
  header["n"] = g.n;
  if (g.kind == GridKind::StripPeriodic)
    header["extent"] = {g.xi_lo, g.xi_hi};
  else
    header["extent"] = g.extent;
  header["label"] = field.label;
  if (!provenance.empty()) header["provenance"] = provenance;
  os << header.dump() << "\n";

  std::string line;
  for (std::size_t i = 0; i < field.size(); ++i) {
    line.clear();
    append_double(line, g.nodes[i].real());
    line += ',';
    append_double(line, g.nodes[i].imag());
    line += ',';
    append_double(line, field.values[i].real());
    line += ',';
    append_double(line, field.values[i].imag());
    line += '\n';
    os << line;
  }
}

SampledField read_qbf(std::istream& is) {
  std::string header_line;
  if (!std::getline(is, header_line)) throw std::runtime_error("QBF: missing header line");
  nlohmann::json header = nlohmann::json::parse(header_line);
  GridKind kind = kind_from(header.at("kind").get<std::string>());
  int n = header.at("n").get<int>();

  GridPtr grid;
  if (kind == GridKind::StripPeriodic) {
    auto ext = header.at("extent");
    grid = make_grid_strip(n, ext.at(0).get<double>(), ext.at(1).get<double>());
  } else {
    grid = make_grid(kind, n, header.at("extent").get<double>());
  }

  SampledField field(grid, header.value("label", std::string{}));
  std::string line;
  double scale = std::max(1.0, std::abs(grid->extent)) * 1e-12;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    if (!std::getline(is, line)) throw std::runtime_error("QBF: truncated value rows");
    double zr, zi, vr, vi;
    if (std::sscanf(line.c_str(), "%lg , %lg , %lg , %lg", &zr, &zi, &vr, &vi) != 4)
      throw std::runtime_error("QBF: malformed row " + std::to_string(i));
    if (std::abs(Complex{zr, zi} - grid->nodes[i]) > scale)
      throw std::runtime_error("QBF: node coordinates do not match the declared grid");
    if (!std::isfinite(vr) || !std::isfinite(vi))
      throw std::runtime_error("QBF: non-finite value in row " + std::to_string(i));
    field.values[i] = Complex{vr, vi};
  }
  return field;
}

void write_qbf_file(const std::string& path, const SampledField& field,
                    const std::string& provenance) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_qbf(os, field, provenance);
}

SampledField read_qbf_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_qbf(is);
}

}  // namespace qbel
