#include <doctest.h>

#include <cmath>

#include "pheno/asymptotics.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

namespace {

StrategyOptions quick() {
  StrategyOptions o;
  o.nx = 61;
  o.dt = 1e-2;
  o.n_snapshots = 0;
  return o;
}

SimOptions sim(const StrategyOptions& s) {
  SimOptions o;
  o.dt = s.dt;
  o.n_snapshots = s.n_snapshots;
  return o;
}

}  // namespace

TEST_CASE("fixed schedules") {
  const auto p = paper_params();
  const auto m = mtd_schedule(p, 4.0);
  CHECK(m.at(2.0) == p.mtd());
  CHECK(m.end() == 4.0);
  CHECK(constant_schedule({1, 2}, 3.0).at(0.0) == DosePair{1, 2});
}

TEST_CASE("atom boundary feedbacks solve their defining relations") {
  const auto p = paper_params();
  const auto eq = equilibrium(p, {0.0, 0.5});
  const auto a = AtomModel::at(p, eq.x_H_inf, eq.x_C_inf);
  const double rho_H0 = 2.7;
  const auto bH = boundary_u1_on_H(a, rho_H0, 7.0, 0.3);
  CHECK(a.R_H(p.theta_H * rho_H0, 0.3, {bH.raw, 7.0}) == doctest::Approx(0.0).scale(1.0));
  CHECK(bH.u1 >= 0.0);
  CHECK(bH.u1 <= p.u1_max);

  const double rho_H = 2.0;
  const auto bHC = boundary_u1_on_HC(a, 7.0, rho_H);
  const double rho_C = a.gamma() * rho_H;
  CHECK(a.R_H(rho_H, rho_C, {bHC.raw, 7.0}) == doctest::Approx(a.R_C(rho_H, rho_C, {bHC.raw, 7.0})));
  CHECK(bHC.clipped == (bHC.raw < 0 || bHC.raw > p.u1_max));
}

TEST_CASE("density feedback on the healthy boundary freezes rho_H") {
  const auto p = paper_params();
  auto g = make_grid(61);
  auto [h0, c0] = paper_initial(g);
  SimOptions so;
  so.dt = 1e-2;
  so.n_snapshots = 0;
  const auto pre = simulate(p, h0, c0, constant_schedule({0.0, 0.5}, 20.0), 20.0, so);
  so.t0 = 20.0;
  const auto mid = simulate(p, pre.final_H, pre.final_C, ControlSchedule({20.0, 21.0}, {p.mtd()}), 1.0, so);
  const auto& h = mid.final_H;
  const auto& c = mid.final_C;
  const SampledModel m(p, g);
  const auto b = density_u1_on_H(m, h.values, c.values, 7.0);
  REQUIRE(b.admissible);
  ExponentialStepper st(m);
  std::vector<double> RH, RC;
  st.rates(total_mass(h), total_mass(c), {b.u1, 7.0}, RH, RC);
  std::vector<double> w(g->size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = RH[i] * h.values[i];
  CHECK(g->integrate(w) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("MTD then H-boundary keeps the healthy constraint") {
  const auto p = paper_params();
  const auto o = quick();
  auto [h, c] = paper_initial(make_grid(o.nx));
  const auto tr = simulate_closed_loop(p, h, c, mtd_policy(p), 10.0, sim(o));
  const auto rep = constraint_report(tr, p, 2e-3);
  CHECK(rep.min_g2_margin > -2e-3);
  const auto arcs = extract_arcs(tr, {ArcKind::mtd, ArcKind::h_boundary});
  REQUIRE(arcs.size() == 2);
  CHECK(arcs[0].kind == ArcKind::mtd);
  CHECK(arcs[1].kind == ArcKind::h_boundary);
  CHECK(arcs[0].t_end == arcs[1].t_start);
  CHECK(arcs[1].t_end == doctest::Approx(10.0));
}

TEST_CASE("quasi-periodic rule alternates holiday and MTD") {
  const auto p = paper_params();
  const auto o = quick();
  auto [h, c] = paper_initial(make_grid(o.nx));
  const auto tr = simulate_closed_loop(p, h, c, quasi_periodic_policy_1(p), 40.0, sim(o));
  int switches = 0;
  for (std::size_t k = 1; k < tr.size(); ++k) switches += tr.mode[k] != tr.mode[k - 1];
  CHECK(switches >= 3);
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const DosePair u{tr.u1[k], tr.u2[k]};
    CHECK((u == DosePair{0.0, 0.5} || u == p.mtd()));
  }
  CHECK(!cycle_minima(tr).empty());
}

TEST_CASE("second quasi-periodic rule has an H-boundary mode") {
  const auto p = paper_params();
  const auto pol = quasi_periodic_policy_2(p);
  CHECK(pol.mode_names.size() == 3);
  const auto o = quick();
  auto [h, c] = paper_initial(make_grid(o.nx));
  const auto tr = simulate_closed_loop(p, h, c, pol, 40.0, sim(o));
  bool saw2 = false;
  for (int m : tr.mode) saw2 |= m == 2;
  CHECK(saw2);
}

TEST_CASE("two-phase plan beats plain holiday and respects its split") {
  const auto p = paper_params();
  TwoPhaseOptions o;
  o.nx = 61;
  o.dt = 1e-2;
  o.n_snapshots = 0;
  o.split_candidates = 8;
  const auto plan = two_phase_plan(p, {0.0, 0.5}, 20.0, 8.0, o);
  CHECK(plan.T1 + plan.T2 == doctest::Approx(20.0));
  CHECK(plan.T2 <= 8.0 + 1e-12);
  CHECK(plan.traj.t.back() == doctest::Approx(20.0));
  REQUIRE(!plan.arcs.empty());
  CHECK(plan.arcs.front().kind == ArcKind::phase1);
  CHECK(plan.split_scan.size() == 8);

  auto [h, c] = paper_initial(make_grid(61));
  SimOptions so;
  so.dt = 1e-2;
  so.n_snapshots = 0;
  const auto hol = simulate(p, h, c, constant_schedule({0.0, 0.5}, 20.0), 20.0, so);
  CHECK(plan.final_rho_C() < hol.final_rho_C());
  CHECK(plan.arcs_json()["arcs"].size() == plan.arcs.size());
}

TEST_CASE("arc names") {
  CHECK(std::string(arc_name(ArcKind::h_boundary)) == "h-boundary");
  CHECK(std::string(arc_name(ArcKind::hc_boundary)) == "hc-boundary");
}
