#include <doctest.h>

#include <cmath>

#include "pheno/asymptotics.hpp"
#include "pheno/errors.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

TEST_CASE("untreated equilibrium") {
  const auto p = paper_params();
  const auto e = equilibrium(p, {0.0, 0.0});
  CHECK(e.rho_H_inf == doctest::Approx(2.5792).epsilon(1e-4));
  CHECK(e.rho_C_inf == doctest::Approx(6.1194).epsilon(1e-4));
  CHECK(e.regime == Regime::coexistence);
  CHECK(e.singleton_H);
  CHECK(e.singleton_C);
  // rho_inf solves the linear system A rho = I
  CHECK(p.a_HH * e.rho_H_inf + p.a_HC * e.rho_C_inf == doctest::Approx(e.I_H_inf).epsilon(1e-9));
  CHECK(p.a_CH * e.rho_H_inf + p.a_CC * e.rho_C_inf == doctest::Approx(e.I_C_inf).epsilon(1e-9));
}

TEST_CASE("limit intensity is the max fitness ratio") {
  const auto p = paper_params();
  const DosePair u{0.5, 1.0};
  const auto L = limit_intensity(p, u, Population::C);
  double best = -1e300;
  for (int i = 0; i <= 100000; ++i) best = std::max(best, fitness_ratio(p, u, Population::C, i / 1e5));
  CHECK(L.f_max >= best - 1e-12);
  CHECK(L.f_max - best < 1e-6);  // maximiser sits on the mu_C kink
  REQUIRE(L.singleton());
  CHECK(fitness_ratio(p, u, Population::C, L.argmax[0]) == doctest::Approx(L.f_max).epsilon(1e-12));
}

TEST_CASE("heavy cytotoxic dose drives extinction") {
  const auto p = paper_params();
  const auto L = limit_intensity(p, {3.5, 7.0}, Population::H);
  if (L.f_max <= 0) CHECK(L.extinct);
  const auto e = equilibrium(p, {3.5, 7.0});
  CHECK(e.rho_H_inf >= 0);
  CHECK(e.rho_C_inf >= 0);
}

TEST_CASE("single-population limit") {
  const auto p = paper_params();
  const auto l = single_population_limit(p, {0.0, 0.5}, Population::C);
  CHECK(l.viable);
  CHECK(l.rho_inf > 0);
  CHECK(l.min_drug_fitness > 0);
  CHECK(l.B_set.size() == 1);
}

TEST_CASE("Lyapunov matrix determinant") {
  const auto p = paper_params();
  CHECK(lyapunov_det_formula(p) == doctest::Approx(5710.2857).epsilon(1e-7));
  CHECK(det2(lyapunov_matrix(p)) == doctest::Approx(lyapunov_det_formula(p)).epsilon(1e-9));
  const auto M = lyapunov_matrix(p, 2.0, 3.0);
  CHECK(M[0][1] == doctest::Approx(M[1][0]));
  CHECK(M[0][0] == doctest::Approx(4.0 * p.a_HH));
}

TEST_CASE("Lyapunov functional decays toward equilibrium") {
  const auto p = paper_params();
  const DosePair u{0.0, 0.5};
  auto [h, c] = paper_initial(make_grid(101));
  SimOptions o;
  o.dt = 0.01;
  o.n_snapshots = 40;
  const auto tr = simulate(p, h, c, ControlSchedule::constant(u, 40.0), 40.0, o);
  const auto rep = equilibrium(p, u);
  const auto L = lyapunov_series(p, tr, u, rep);
  REQUIRE(L.V.size() == tr.snapshots.size());
  CHECK(L.V.back() < L.V.front());
  CHECK(L.V.back() >= -1e-9);
  CHECK(lyapunov_quadratic(p, rep, rep.rho_H_inf, rep.rho_C_inf) == doctest::Approx(0.0));
  CHECK(lyapunov_quadratic(p, rep, rep.rho_H_inf + 0.1, rep.rho_C_inf - 0.2) <= 0.0);
}

TEST_CASE("envelope fit recovers a known power") {
  std::vector<double> t, y;
  for (int i = 1; i <= 400; ++i) {
    const double s = 10.0 + i;
    t.push_back(s);
    y.push_back(3.0 * std::pow(std::log(s) / s, 0.8));
  }
  const auto f = envelope_fit(t, y, 10.0, 1.0);
  CHECK(f.ok);
  CHECK(f.exponent == doctest::Approx(0.8).epsilon(0.02));
}

TEST_CASE("regime names") {
  CHECK(std::string(regime_name(Regime::coexistence)) == "coexistence");
  const auto j = equilibrium(paper_params(), {0, 0}).to_json();
  CHECK(j.contains("rho_H_inf"));
}
