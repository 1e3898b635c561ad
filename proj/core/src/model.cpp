#include "pheno/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pheno/errors.hpp"

namespace pheno {

namespace {

const char* mono_name(Monotonicity m) {
  switch (m) {
    case Monotonicity::decreasing: return "decreasing";
    case Monotonicity::nonincreasing: return "nonincreasing";
    default: return "none";
  }
}

Monotonicity mono_from(const std::string& s, const std::string& path) {
  if (s == "decreasing") return Monotonicity::decreasing;
  if (s == "nonincreasing") return Monotonicity::nonincreasing;
  if (s == "none") return Monotonicity::none;
  throw ConfigError(path + ".monotonicity: unknown tag '" + s + "'");
}

double num(const nlohmann::json& j, const std::string& key, const std::string& path, double dflt, bool required) {
  if (!j.contains(key)) {
    if (required) throw ConfigError(path + "." + key + ": missing");
    return dflt;
  }
  if (!j.at(key).is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

void check_x(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream os;
    os << "phenotype " << x << " outside [0,1]";
    throw DomainError(os.str());
  }
}

}  // namespace

RateFn RateFn::constant(double a, Monotonicity m) {
  RateFn f;
  f.kind_ = Kind::constant;
  f.a_ = a;
  f.tag_ = m;
  return f;
}

RateFn RateFn::linear(double a, double b, Monotonicity m) {
  RateFn f;
  f.kind_ = Kind::linear;
  f.a_ = a;
  f.b_ = b;
  f.tag_ = m;
  return f;
}

RateFn RateFn::rational(double a, double b, double c, double offset, bool clamp_zero, Monotonicity m) {
  RateFn f;
  f.kind_ = Kind::rational;
  f.a_ = a;
  f.b_ = b;
  f.c_ = c;
  f.offset_ = offset;
  f.clamp_ = clamp_zero;
  f.tag_ = m;
  return f;
}

RateFn RateFn::custom(std::function<double(double)> fn, Monotonicity m) {
  RateFn f;
  f.kind_ = Kind::custom;
  f.f_ = std::move(fn);
  f.tag_ = m;
  return f;
}

double RateFn::operator()(double x) const {
  switch (kind_) {
    case Kind::constant: return a_;
    case Kind::linear: return a_ + b_ * x;
    case Kind::rational: {
      const double v = a_ / (b_ + c_ * x * x) + offset_;
      return clamp_ ? std::max(v, 0.0) : v;
    }
    case Kind::custom: return f_(x);
  }
  return 0.0;
}

nlohmann::json RateFn::to_json() const {
  nlohmann::json j;
  switch (kind_) {
    case Kind::constant: j = {{"form", "constant"}, {"a", a_}}; break;
    case Kind::linear: j = {{"form", "linear"}, {"a", a_}, {"b", b_}}; break;
    case Kind::rational:
      j = {{"form", "rational"}, {"a", a_}, {"b", b_}, {"c", c_}, {"offset", offset_}, {"clamp_zero", clamp_}};
      break;
    case Kind::custom: j = {{"form", "custom"}}; break;
  }
  j["monotonicity"] = mono_name(tag_);
  return j;
}

RateFn RateFn::from_json(const nlohmann::json& j, const std::string& path) {
  if (j.is_number()) return constant(j.get<double>());
  if (!j.is_object()) throw ConfigError(path + ": expected a number or a rate descriptor object");
  static const std::vector<std::string> allowed{"form", "a", "b", "c", "offset", "clamp_zero", "monotonicity"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError(path + "." + it.key() + ": unknown key");
  if (!j.contains("form") || !j.at("form").is_string()) throw ConfigError(path + ".form: missing or not a string");
  const std::string form = j.at("form").get<std::string>();
  Monotonicity m = Monotonicity::none;
  if (j.contains("monotonicity")) {
    if (!j.at("monotonicity").is_string()) throw ConfigError(path + ".monotonicity: expected a string");
    m = mono_from(j.at("monotonicity").get<std::string>(), path);
  }
  if (form == "constant") return constant(num(j, "a", path, 0, true), m);
  if (form == "linear") return linear(num(j, "a", path, 0, true), num(j, "b", path, 0, true), m);
  if (form == "rational") {
    bool clamp = false;
    if (j.contains("clamp_zero")) {
      if (!j.at("clamp_zero").is_boolean()) throw ConfigError(path + ".clamp_zero: expected a boolean");
      clamp = j.at("clamp_zero").get<bool>();
    }
    return rational(num(j, "a", path, 0, true), num(j, "b", path, 1, false), num(j, "c", path, 0, false),
                    num(j, "offset", path, 0, false), clamp, m);
  }
  throw ConfigError(path + ".form: unknown form '" + form + "'");
}

void check_dose(const ModelParams& p, const DosePair& u) {
  const double tol = 1e-12;
  if (!(u.u1 >= -tol && u.u1 <= p.u1_max * (1 + tol) + tol) || !(u.u2 >= -tol && u.u2 <= p.u2_max * (1 + tol) + tol)) {
    std::ostringstream os;
    os << "dose (" << u.u1 << ", " << u.u2 << ") outside [0," << p.u1_max << "]x[0," << p.u2_max << "]";
    throw DomainError(os.str());
  }
}

double growth_rate_H(const ModelParams& p, double x, double rho_H, double rho_C, const DosePair& u) {
  check_x(x);
  if (rho_H < 0 || rho_C < 0) throw DomainError("negative cell count");
  check_dose(p, u);
  return p.r_H(x) / (1.0 + p.alpha_H * u.u2) - p.d_H(x) * (p.a_HH * rho_H + p.a_HC * rho_C) - u.u1 * p.mu_H(x);
}

double growth_rate_C(const ModelParams& p, double x, double rho_C, double rho_H, const DosePair& u) {
  check_x(x);
  if (rho_H < 0 || rho_C < 0) throw DomainError("negative cell count");
  check_dose(p, u);
  return p.r_C(x) / (1.0 + p.alpha_C * u.u2) - p.d_C(x) * (p.a_CH * rho_H + p.a_CC * rho_C) - u.u1 * p.mu_C(x);
}

ModelParams paper_params(MuCVariant variant) {
  ModelParams p;
  p.r_H = RateFn::rational(1.5, 1.0, 1.0, 0.0, false, Monotonicity::decreasing);
  p.r_C = RateFn::rational(3.0, 1.0, 1.0, 0.0, false, Monotonicity::decreasing);
  p.d_H = RateFn::linear(0.5, -0.05, Monotonicity::decreasing);
  p.d_C = RateFn::linear(0.5, -0.15, Monotonicity::decreasing);
  p.mu_H = RateFn::rational(0.2, 0.49, 1.0, 0.0, false, Monotonicity::decreasing);
  if (variant == MuCVariant::legacy)
    p.mu_C = RateFn::rational(0.4, 0.49, 1.0, 0.0, false, Monotonicity::decreasing);
  else
    p.mu_C = RateFn::rational(0.9, 0.49, 0.6, -1.0, true, Monotonicity::nonincreasing);
  p.alpha_H = 0.01;
  p.alpha_C = 1.0;
  p.a_HH = 1.0;
  p.a_CC = 1.0;
  p.a_HC = 0.07;
  p.a_CH = 0.01;
  p.u1_max = 3.5;
  p.u2_max = 7.0;
  p.theta_HC = 0.4;
  p.theta_H = 0.6;
  return p;
}

std::vector<std::string> preset_names() { return {"lorz2013-modified", "lorz2013-legacy"}; }

ModelParams preset(const std::string& name) {
  if (name == "lorz2013-modified") return paper_params(MuCVariant::modified);
  if (name == "lorz2013-legacy") return paper_params(MuCVariant::legacy);
  throw ConfigError("preset: unknown preset '" + name + "'");
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

nlohmann::json ValidationReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) arr.push_back({{"check", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"ok", ok()}, {"checks", arr}};
}

ValidationReport validate(const ModelParams& p, std::size_t n) {
  ValidationReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };
  std::ostringstream os;

  os << "alpha_H=" << p.alpha_H << " alpha_C=" << p.alpha_C;
  add("sensitivity_order", p.alpha_H > 0 && p.alpha_H < p.alpha_C, os.str());
  os.str("");
  os << "a_HC=" << p.a_HC << " a_HH=" << p.a_HH << " a_CH=" << p.a_CH << " a_CC=" << p.a_CC;
  add("competition_order", p.a_HC > 0 && p.a_HC < p.a_HH && p.a_CH > 0 && p.a_CH < p.a_CC, os.str());
  os.str("");
  os << "u1_max=" << p.u1_max << " u2_max=" << p.u2_max;
  add("dose_bounds", p.u1_max > 0 && p.u2_max > 0, os.str());
  os.str("");
  os << "theta_HC=" << p.theta_HC << " theta_H=" << p.theta_H;
  add("thresholds", p.theta_HC > 0 && p.theta_HC < 1 && p.theta_H > 0 && p.theta_H < 1, os.str());

  const std::pair<const char*, const RateFn*> fns[] = {{"r_H", &p.r_H},   {"r_C", &p.r_C},   {"d_H", &p.d_H},
                                                       {"d_C", &p.d_C},   {"mu_H", &p.mu_H}, {"mu_C", &p.mu_C}};
  const double h = 1.0 / static_cast<double>(n - 1);
  for (const auto& [name, f] : fns) {
    double vmin = 1e300, lip = 0.0;
    bool mono = true, finite = true;
    double prev = (*f)(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double x = i == n - 1 ? 1.0 : static_cast<double>(i) * h;
      const double v = (*f)(x);
      finite = finite && std::isfinite(v);
      vmin = std::min(vmin, v);
      if (i > 0) {
        lip = std::max(lip, std::abs(v - prev) / h);
        if (f->tag() == Monotonicity::decreasing && !(v < prev)) mono = false;
        if (f->tag() == Monotonicity::nonincreasing && v > prev) mono = false;
      }
      prev = v;
    }
    os.str("");
    os << "min=" << vmin;
    add(std::string(name) + "_nonnegative", finite && vmin >= 0.0, os.str());
    add(std::string(name) + "_monotonicity", mono, mono_name(f->tag()));
    os.str("");
    os << "max grid difference quotient=" << lip;
    // bounded on the grid; a jump would show up as a quotient of order 1/h
    add(std::string(name) + "_lipschitz", finite && lip < 1e3, os.str());
  }
  for (const auto* d : {&p.d_H, &p.d_C}) {
    double vmin = 1e300;
    for (std::size_t i = 0; i < n; ++i) vmin = std::min(vmin, (*d)(static_cast<double>(i) * h));
    os.str("");
    os << "min=" << vmin;
    add(d == &p.d_H ? "d_H_positive" : "d_C_positive", vmin > 0.0, os.str());
  }
  return rep;
}

nlohmann::json params_to_json(const ModelParams& p) {
  return {{"r_H", p.r_H.to_json()},   {"r_C", p.r_C.to_json()},       {"d_H", p.d_H.to_json()},
          {"d_C", p.d_C.to_json()},   {"mu_H", p.mu_H.to_json()},     {"mu_C", p.mu_C.to_json()},
          {"alpha_H", p.alpha_H},     {"alpha_C", p.alpha_C},         {"a_HH", p.a_HH},
          {"a_HC", p.a_HC},           {"a_CH", p.a_CH},               {"a_CC", p.a_CC},
          {"u1_max", p.u1_max},       {"u2_max", p.u2_max},           {"theta_HC", p.theta_HC},
          {"theta_H", p.theta_H}};
}

ModelParams params_from_json(const nlohmann::json& j, const ModelParams& base, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  ModelParams p = base;
  const std::pair<const char*, RateFn*> fns[] = {{"r_H", &p.r_H}, {"r_C", &p.r_C},   {"d_H", &p.d_H},
                                                 {"d_C", &p.d_C}, {"mu_H", &p.mu_H}, {"mu_C", &p.mu_C}};
  const std::pair<const char*, double*> scalars[] = {
      {"alpha_H", &p.alpha_H}, {"alpha_C", &p.alpha_C}, {"a_HH", &p.a_HH},         {"a_HC", &p.a_HC},
      {"a_CH", &p.a_CH},       {"a_CC", &p.a_CC},       {"u1_max", &p.u1_max},     {"u2_max", &p.u2_max},
      {"theta_HC", &p.theta_HC}, {"theta_H", &p.theta_H}};
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = it.key();
    const std::string sub = path + "." + key;
    bool found = false;
    for (auto& [name, f] : fns)
      if (key == name) {
        *f = RateFn::from_json(it.value(), sub);
        found = true;
      }
    for (auto& [name, v] : scalars)
      if (key == name) {
        if (!it.value().is_number()) throw ConfigError(sub + ": expected a number");
        *v = it.value().get<double>();
        found = true;
      }
    if (!found) throw ConfigError(sub + ": unknown key");
  }
  return p;
}

SampledModel::SampledModel(const ModelParams& p, GridPtr g) : params(p), grid(std::move(g)) {
  const std::size_t n = grid->size();
  r_H.resize(n);
  r_C.resize(n);
  d_H.resize(n);
  d_C.resize(n);
  mu_H.resize(n);
  mu_C.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = grid->x(i);
    r_H[i] = p.r_H(x);
    r_C[i] = p.r_C(x);
    d_H[i] = p.d_H(x);
    d_C[i] = p.d_C(x);
    mu_H[i] = p.mu_H(x);
    mu_C[i] = p.mu_C(x);
  }
}

}  // namespace pheno
