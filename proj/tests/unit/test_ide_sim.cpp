#include <doctest.h>

#include <cmath>

#include "pheno/errors.hpp"
#include "pheno/ide_sim.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

namespace {

ModelParams flat_params(double r, double d, double mu) {
  ModelParams p = paper_params();
  p.r_H = p.r_C = RateFn::constant(r);
  p.d_H = p.d_C = RateFn::constant(d);
  p.mu_H = p.mu_C = RateFn::constant(mu);
  p.a_HC = p.a_CH = 0.0;
  return p;
}

double logistic_exact(double r, double d, double rho0, double t) {
  return rho0 * std::exp(r * t) / (1 + rho0 * d * std::expm1(r * t) / r);
}

SimOptions opts(double dt, bool corr = false) {
  SimOptions o;
  o.dt = dt;
  o.n_snapshots = 0;
  o.corrector = corr;
  return o;
}

}  // namespace

TEST_CASE("schedule lookup is right-continuous") {
  ControlSchedule s({0.0, 1.0, 2.0}, {{1, 1}, {2, 2}});
  CHECK(s.at(0.5) == DosePair{1, 1});
  CHECK(s.at(1.0) == DosePair{2, 2});
  CHECK(s.at(5.0) == DosePair{2, 2});
  CHECK(s.total_variation() == doctest::Approx(2.0));
  s.append(3.0, {2, 2});
  CHECK(s.pieces() == 2);
  CHECK(s.end() == 3.0);
  s.append(4.0, {0, 0});
  CHECK(s.pieces() == 3);
  CHECK_THROWS_AS(ControlSchedule({0.0, 0.0}, {{1, 1}}), DomainError);
  CHECK_THROWS_AS(ControlSchedule({0.0, 1.0}, {}), DomainError);
}

TEST_CASE("uncoupled linear growth is integrated exactly") {
  auto p = paper_params();
  p.a_HH = p.a_HC = p.a_CH = p.a_CC = 0.0;
  auto g = make_grid(51);
  auto [h, c] = paper_initial(g);
  const DosePair u{1.0, 2.0};
  const auto tr = simulate(p, h, c, ControlSchedule::constant(u, 2.0), 2.0, opts(0.01));
  std::vector<double> eH(g->size()), eC(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->x(i);
    eH[i] = h.values[i] * std::exp(2.0 * (p.r_H(x) / (1 + p.alpha_H * 2.0) - p.mu_H(x)));
    eC[i] = c.values[i] * std::exp(2.0 * (p.r_C(x) / (1 + p.alpha_C * 2.0) - p.mu_C(x)));
  }
  CHECK(tr.rho_H.back() == doctest::Approx(g->integrate(eH)).epsilon(1e-12));
  CHECK(tr.rho_C.back() == doctest::Approx(g->integrate(eC)).epsilon(1e-12));
}

TEST_CASE("x-independent rates reduce to the logistic ODE, first order in dt") {
  const auto p = flat_params(1.0, 1.0, 0.0);
  auto g = make_grid(11);
  const auto h = constant_density(g, 0.5), c = constant_density(g, 0.5);
  const double exact = logistic_exact(1.0, 1.0, 0.5, 3.0);
  auto err = [&](double dt, bool corr) {
    const auto tr = simulate(p, h, c, ControlSchedule::constant({}, 3.0), 3.0, opts(dt, corr));
    return std::abs(tr.rho_C.back() - exact);
  };
  CHECK(err(0.01, false) / err(0.005, false) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(err(0.01, true) / err(0.005, true) == doctest::Approx(4.0).epsilon(0.1));
  CHECK(err(0.001, true) < 1e-6);
}

TEST_CASE("breakpoints inside a step are honoured") {
  const auto p = flat_params(1.0, 1.0, 1.0);
  auto g = make_grid(11);
  const auto h = constant_density(g, 0.5), c = constant_density(g, 0.5);
  // switch at t = 0.55 with dt = 0.1: the simulator must split the step
  ControlSchedule s({0.0, 0.55, 1.0}, {{0.0, 0.0}, {2.0, 0.0}});
  const auto a = simulate(p, h, c, s, 1.0, opts(0.1));
  ControlSchedule s2({0.0, 0.55, 1.0}, {{0.0, 0.0}, {2.0, 0.0}});
  const auto b = simulate(p, h, c, s2, 1.0, opts(0.05));
  const auto fine = simulate(p, h, c, s, 1.0, opts(1e-5));
  CHECK(std::abs(a.rho_C.back() - fine.rho_C.back()) < 0.02);
  CHECK(std::abs(b.rho_C.back() - fine.rho_C.back()) < std::abs(a.rho_C.back() - fine.rho_C.back()));
  CHECK(a.schedule.breaks().size() == 3);
}

TEST_CASE("closed loop with a constant rule matches open loop bit for bit") {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(41));
  const DosePair u{0.5, 1.0};
  const auto a = simulate(p, h, c, ControlSchedule::constant(u, 2.0), 2.0, opts(0.01));
  const auto b = simulate_closed_loop(p, h, c, constant_policy(u), 2.0, opts(0.01));
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.rho_H[k] == b.rho_H[k]);
    CHECK(a.rho_C[k] == b.rho_C[k]);
  }
  CHECK(b.schedule.pieces() == 1);
}

TEST_CASE("positivity and bookkeeping") {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(41));
  SimOptions o = opts(0.01);
  o.n_snapshots = 10;
  const auto tr = simulate(p, h, c, mtd_schedule(p, 3.0), 3.0, o);
  CHECK(tr.size() == 301);
  CHECK(tr.snapshots.size() == 11);
  CHECK(tr.snapshots.back().t == doctest::Approx(3.0));
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(tr.rho_H[k] > 0);
    CHECK(tr.rho_C[k] > 0);
    CHECK(tr.rho_CS[k] + tr.rho_CR[k] == doctest::Approx(tr.rho_C[k]));
  }
  for (double v : tr.final_C.values) CHECK(v >= 0);
  CHECK(tr.g2.front() == doctest::Approx(1.0));
}

TEST_CASE("overflow is reported with time and phenotype") {
  auto p = flat_params(1e6, 0.0, 0.0);
  p.a_HH = p.a_CC = 0.0;
  auto g = make_grid(11);
  try {
    simulate(p, constant_density(g, 1.0), constant_density(g, 1.0), ControlSchedule::constant({}, 1.0), 1.0, opts(0.1));
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(e.time() == doctest::Approx(0.1));
    CHECK(e.phenotype() >= 0.0);
  }
}

TEST_CASE("invalid inputs") {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(41));
  CHECK_THROWS_AS(simulate(p, h, c, ControlSchedule::constant({5.0, 0.0}, 1.0), 1.0), DomainError);
  CHECK_THROWS_AS(simulate(p, h, c, ControlSchedule::constant({}, 1.0), 1.0, opts(-1.0)), DomainError);
  auto [h2, c2] = paper_initial(make_grid(21));
  CHECK_THROWS_AS(simulate(p, h, c2, ControlSchedule::constant({}, 1.0), 1.0), DomainError);
}

TEST_CASE("extend concatenates consistent pieces") {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(41));
  const DosePair u{0.0, 0.5};
  const auto whole = simulate(p, h, c, ControlSchedule::constant(u, 2.0), 2.0, opts(0.01));
  auto first = simulate(p, h, c, ControlSchedule::constant(u, 1.0), 1.0, opts(0.01));
  SimOptions o = opts(0.01);
  o.t0 = 1.0;
  o.rho_H0 = first.rho_H0;
  const auto second = simulate(p, first.final_H, first.final_C, ControlSchedule({1.0, 2.0}, {u}), 1.0, o);
  first.extend(second);
  REQUIRE(first.size() == whole.size());
  CHECK(first.rho_C.back() == doctest::Approx(whole.rho_C.back()).epsilon(1e-12));
  CHECK(first.t.back() == doctest::Approx(2.0));
  CHECK(first.schedule.pieces() == 1);
}

TEST_CASE("constraint report finds the first crossing") {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(41));
  const auto tr = simulate(p, h, c, mtd_schedule(p, 5.0), 5.0, opts(0.01));
  const auto rep = constraint_report(tr, p);
  REQUIRE(rep.first_violation);
  CHECK(rep.violated == "H");
  // the crossing lies between the bracketing samples
  std::size_t k = 0;
  while (tr.g2[k] >= p.theta_H) ++k;
  CHECK(*rep.first_violation <= tr.t[k]);
  CHECK(*rep.first_violation >= tr.t[k - 1]);
  CHECK(rep.min_g2_margin < 0);
}
