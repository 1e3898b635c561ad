#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pheno/grid.hpp"

namespace pheno {

enum class Monotonicity { none, nonincreasing, decreasing };

/// Nonnegative rate on [0,1].
///   constant: a
///   linear:   a + b x
///   rational: a / (b + c x^2) + offset, optionally clamped at 0
///   custom:   arbitrary closure (not serialisable)
class RateFn {
 public:
  enum class Kind { constant, linear, rational, custom };

  RateFn() = default;
  static RateFn constant(double a, Monotonicity m = Monotonicity::nonincreasing);
  static RateFn linear(double a, double b, Monotonicity m = Monotonicity::none);
  static RateFn rational(double a, double b, double c, double offset = 0.0, bool clamp_zero = false,
                         Monotonicity m = Monotonicity::none);
  static RateFn custom(std::function<double(double)> f, Monotonicity m = Monotonicity::none);

  double operator()(double x) const;
  Kind kind() const { return kind_; }
  Monotonicity tag() const { return tag_; }

  nlohmann::json to_json() const;
  static RateFn from_json(const nlohmann::json& j, const std::string& path);

 private:
  Kind kind_ = Kind::constant;
  double a_ = 0, b_ = 0, c_ = 0, offset_ = 0;
  bool clamp_ = false;
  Monotonicity tag_ = Monotonicity::none;
  std::function<double(double)> f_;
};

enum class Population { H, C };

struct DosePair {
  double u1 = 0.0;  // cytotoxic
  double u2 = 0.0;  // cytostatic
  bool operator==(const DosePair&) const = default;
};

struct ModelParams {
  RateFn r_H, r_C, d_H, d_C, mu_H, mu_C;
  double alpha_H = 0.01, alpha_C = 1.0;
  double a_HH = 1.0, a_HC = 0.07, a_CH = 0.01, a_CC = 1.0;
  double u1_max = 3.5, u2_max = 7.0;
  double theta_HC = 0.4, theta_H = 0.6;

  DosePair mtd() const { return {u1_max, u2_max}; }
  double gamma() const { return (1.0 - theta_HC) / theta_HC; }
};

void check_dose(const ModelParams& p, const DosePair& u);

double growth_rate_H(const ModelParams& p, double x, double rho_H, double rho_C, const DosePair& u);
double growth_rate_C(const ModelParams& p, double x, double rho_C, double rho_H, const DosePair& u);

enum class MuCVariant { modified, legacy };

ModelParams paper_params(MuCVariant variant = MuCVariant::modified);
/// "lorz2013-modified" or "lorz2013-legacy"
ModelParams preset(const std::string& name);
std::vector<std::string> preset_names();

struct ValidationCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool ok() const;
  nlohmann::json to_json() const;
};

ValidationReport validate(const ModelParams& p, std::size_t n_check = 1001);

nlohmann::json params_to_json(const ModelParams& p);
/// Fields not present keep the values of `base`. Unknown keys throw ConfigError.
ModelParams params_from_json(const nlohmann::json& j, const ModelParams& base, const std::string& path = "params");

/// Rate tables on a phenotype grid. All quadrature in the simulators uses these.
struct SampledModel {
  ModelParams params;
  GridPtr grid;
  std::vector<double> r_H, r_C, d_H, d_C, mu_H, mu_C;

  SampledModel() = default;
  SampledModel(const ModelParams& p, GridPtr g);
};

}  // namespace pheno
