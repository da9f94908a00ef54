#include "quasibel/expr.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qbel {

namespace {

struct Term {
  Complex coef;
  int z_pow = 0, zbar_pow = 0;
  std::vector<int> t_pow;
  int bump = 0;  // 0 = one, 1 = cap, 2 = indicator
  Complex center{0, 0};
  double radius = 1.0;
};

double bump_value(const Term& t, Complex z) {
  switch (t.bump) {
    case 0:
      return 1.0;
    case 1: {
      double s = std::norm((z - t.center) / t.radius);
      return s < 1.0 ? std::exp(-1.0 / (1.0 - s)) : 0.0;
    }
    default:
      return std::abs(z - t.center) <= t.radius ? 1.0 : 0.0;
  }
}

Complex ipow(Complex b, int e) {
  Complex r{1, 0};
  while (e > 0) {
    if (e & 1) r *= b;
    b *= b;
    e >>= 1;
  }
  return r;
}

}  // namespace

FamilySpec parse_family_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  FamilySpec spec;
  spec.d = j.at("d").get<double>();
  spec.t_dim = j.value("t_dim", 1);
  spec.box_lo = j.at("box").at("lo").get<std::vector<double>>();
  spec.box_hi = j.at("box").at("hi").get<std::vector<double>>();
  if (j.contains("growth"))
    for (const auto& g : j["growth"])
      spec.growth.emplace_back(g.at(0).get<int>(), g.at(1).get<double>());
  if (j.contains("param_growth")) {
    auto pg = j["param_growth"];
    spec.param_growth = {{pg.at(0).get<double>(), pg.at(1).get<double>()}};
  }

  auto terms = std::make_shared<std::vector<Term>>();
  for (const auto& tj : j.at("terms")) {
    Term t;
    auto c = tj.at("coef");
    t.coef = Complex{c.at(0).get<double>(), c.at(1).get<double>()};
    t.z_pow = tj.value("z_pow", 0);
    t.zbar_pow = tj.value("zbar_pow", 0);
    t.t_pow = tj.value("t_pow", std::vector<int>(spec.t_dim, 0));
    if (static_cast<int>(t.t_pow.size()) != spec.t_dim)
      throw std::invalid_argument("family term t_pow dimension mismatch");
    std::string bump = tj.value("bump", std::string("one"));
    if (bump == "one")
      t.bump = 0;
    else if (bump == "cap")
      t.bump = 1;
    else if (bump == "indicator")
      t.bump = 2;
    else
      throw std::invalid_argument("unknown bump '" + bump + "'");
    if (tj.contains("center")) {
      auto ctr = tj["center"];
      t.center = Complex{ctr.at(0).get<double>(), ctr.at(1).get<double>()};
    }
    t.radius = tj.value("radius", 1.0);
    terms->push_back(std::move(t));
  }

  spec.rule = [terms](Complex z, std::span<const double> tv) {
    Complex acc{0, 0};
    for (const auto& t : *terms) {
      Complex v = t.coef * ipow(z, t.z_pow) * ipow(std::conj(z), t.zbar_pow);
      for (std::size_t d = 0; d < t.t_pow.size(); ++d)
        if (t.t_pow[d] > 0) v *= std::pow(tv[d], t.t_pow[d]);
      acc += v * bump_value(t, z);
    }
    return acc;
  };
  spec.validate();
  return spec;
}

FamilySpec load_family_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open family spec: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_family_json(ss.str());
}

}  // namespace qbel
