#include <doctest.h>

#include <cmath>

#include "pheno/asymptotics.hpp"
#include "pheno/ode_reduce.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

TEST_CASE("atom model evaluates rates at the atoms") {
  const auto p = paper_params();
  const auto a = AtomModel::at(p, 0.1, 0.3);
  CHECK(a.r_H == doctest::Approx(p.r_H(0.1)));
  CHECK(a.mu_C == doctest::Approx(p.mu_C(0.3)));
  const DosePair u{1.0, 2.0};
  CHECK(a.R_H(1.0, 2.0, u) == doctest::Approx(growth_rate_H(p, 0.1, 1.0, 2.0, u)));
  CHECK(a.R_C(1.0, 2.0, u) == doctest::Approx(growth_rate_C(p, 0.3, 2.0, 1.0, u)));
  CHECK(a.gamma() == doctest::Approx(1.5));
}

TEST_CASE("RK4 is fourth order") {
  const auto a = AtomModel::at(paper_params(), 0.05, 0.16);
  const DosePair u{0.5, 1.0};
  auto run = [&](double dt) {
    OdeState s{2.7, 0.5};
    const int n = static_cast<int>(std::lround(2.0 / dt));
    for (int k = 0; k < n; ++k) s = rk4_step(a, s, u, dt);
    return s.rho_C;
  };
  const double ref = run(1e-4);
  const double e1 = std::abs(run(0.1) - ref), e2 = std::abs(run(0.05) - ref);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("ODE equilibrium matches the asymptotic report") {
  const auto p = paper_params();
  const DosePair u{0.0, 0.5};
  const auto e = equilibrium(p, u);
  const auto tr = simulate_ode(p, e.x_H_inf, e.x_C_inf, {2.7, 0.5}, ControlSchedule::constant(u, 200.0), 200.0, 0.01);
  CHECK(tr.rho_H.back() == doctest::Approx(e.rho_H_inf).epsilon(1e-6));
  CHECK(tr.rho_C.back() == doctest::Approx(e.rho_C_inf).epsilon(1e-6));
}

TEST_CASE("feedback rule carries its mode") {
  const auto a = AtomModel::at(paper_params(), 0.05, 0.16);
  OdeDoseRule rule = [](double, const OdeState& s, int& mode) {
    if (s.rho_C < 1.0) mode = 1;
    return mode == 1 ? DosePair{3.5, 7.0} : DosePair{0.0, 0.0};
  };
  const auto tr = simulate_ode(a, {2.7, 0.5}, rule, 2.0, 0.01);
  CHECK(tr.mode.front() == 1);
  CHECK(tr.u1.front() == 3.5);
}

TEST_CASE("reduction gap shrinks once densities concentrate") {
  const auto p = paper_params();
  GapOptions o;
  o.nx = 201;
  o.dt = 5e-3;
  o.ode_dt = 5e-3;
  const auto mtd = mtd_schedule(p, 1.0);
  const auto early = reduction_gap(p, {0.0, 0.5}, 5.0, mtd, 1.0, o);
  const auto late = reduction_gap(p, {0.0, 0.5}, 60.0, mtd, 1.0, o);
  CHECK(late.sup_gap < early.sup_gap);
  CHECK(late.sup_gap < 0.1);
}

TEST_CASE("curability at the holiday dose") {
  const auto c = check_decreasing(paper_params(), {0.0, 0.5});
  CHECK(c.ok());
  CHECK(c.drho_C < 0);
  CHECK(c.drho_H < 0);
}
