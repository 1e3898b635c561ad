#include <doctest.h>

#include <cmath>

#include "pheno/errors.hpp"
#include "pheno/model.hpp"

using namespace pheno;

TEST_CASE("reference rate functions") {
  const auto p = paper_params();
  CHECK(p.r_H(0.0) == doctest::Approx(1.5));
  CHECK(p.r_C(1.0) == doctest::Approx(1.5));
  CHECK(p.d_H(1.0) == doctest::Approx(0.45));
  CHECK(p.d_C(1.0) == doctest::Approx(0.35));
  CHECK(p.mu_H(0.0) == doctest::Approx(0.2 / 0.49));
  CHECK(p.mu_C(0.0) == doctest::Approx(0.9 / 0.49 - 1.0));
  // the modified cancer sensitivity vanishes for strongly resistant cells
  CHECK(p.mu_C(1.0) == 0.0);
  const auto l = paper_params(MuCVariant::legacy);
  CHECK(l.mu_C(0.5) == doctest::Approx(0.4 / 0.74));
  CHECK(p.gamma() == doctest::Approx(1.5));
  CHECK(p.mtd() == DosePair{3.5, 7.0});
}

TEST_CASE("growth rates match a term-by-term evaluation") {
  const auto p = paper_params();
  const double x = 0.3, rH = 2.0, rC = 0.7;
  const DosePair u{1.2, 3.0};
  const double expH = 1.5 / 1.09 / (1 + 0.01 * 3.0) - (0.5 - 0.015) * (rH + 0.07 * rC) - 1.2 * 0.2 / (0.49 + 0.09);
  CHECK(growth_rate_H(p, x, rH, rC, u) == doctest::Approx(expH).epsilon(1e-14));
  const double expC = 3.0 / 1.09 / 4.0 - (0.5 - 0.045) * (0.01 * rH + rC) - 1.2 * (0.9 / (0.49 + 0.054) - 1.0);
  CHECK(growth_rate_C(p, x, rC, rH, u) == doctest::Approx(expC).epsilon(1e-14));
}

TEST_CASE("domain errors") {
  const auto p = paper_params();
  CHECK_THROWS_AS(growth_rate_H(p, 1.2, 1, 1, {}), DomainError);
  CHECK_THROWS_AS(growth_rate_H(p, 0.2, -1, 1, {}), DomainError);
  CHECK_THROWS_AS(growth_rate_C(p, 0.2, 1, 1, {4.0, 0.0}), DomainError);
  CHECK_THROWS_AS(check_dose(p, {0.0, 7.5}), DomainError);
  CHECK_NOTHROW(check_dose(p, {3.5, 7.0}));
}

TEST_CASE("presets validate") {
  for (const auto& n : preset_names()) {
    const auto rep = validate(preset(n));
    INFO(rep.to_json().dump());
    CHECK(rep.ok());
  }
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("validation catches broken assumptions") {
  auto p = paper_params();
  p.alpha_H = p.alpha_C;
  CHECK_FALSE(validate(p).ok());
  p = paper_params();
  p.r_H = RateFn::linear(1.0, 0.5, Monotonicity::decreasing);
  CHECK_FALSE(validate(p).ok());
  p = paper_params();
  p.d_C = RateFn::linear(0.1, -0.2);
  CHECK_FALSE(validate(p).ok());
}

TEST_CASE("json round trip and strict keys") {
  const auto p = paper_params();
  const auto j = params_to_json(p);
  const auto q = params_from_json(j, ModelParams{});
  for (double x : {0.0, 0.25, 0.8, 1.0}) {
    CHECK(q.r_C(x) == p.r_C(x));
    CHECK(q.mu_C(x) == p.mu_C(x));
    CHECK(q.d_H(x) == p.d_H(x));
  }
  CHECK(q.theta_HC == p.theta_HC);
  CHECK_THROWS_AS(params_from_json({{"thetaHC", 0.3}}, p), ConfigError);
  CHECK_THROWS_AS(params_from_json({{"theta_HC", "0.3"}}, p), ConfigError);
  const auto r = params_from_json({{"theta_HC", 0.3}, {"r_H", 2.0}}, p);
  CHECK(r.theta_HC == 0.3);
  CHECK(r.r_H(0.7) == 2.0);
  try {
    params_from_json({{"mu_C", {{"form", "rational"}, {"a", "x"}}}}, p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("params.mu_C") != std::string::npos);
  }
}

TEST_CASE("sampled model tables") {
  const auto p = paper_params();
  SampledModel m(p, make_grid(11));
  CHECK(m.r_H.size() == 11);
  CHECK(m.mu_C[10] == 0.0);
  CHECK(m.d_C[5] == doctest::Approx(0.425));
}
