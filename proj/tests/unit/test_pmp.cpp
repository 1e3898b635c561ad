#include <doctest.h>

#include <cmath>

#include "pheno/errors.hpp"
#include "pheno/pmp.hpp"

using namespace pheno;

namespace {

AtomModel atoms() {
  const auto p = paper_params();
  const auto eq = equilibrium(p, {0.0, 0.5});
  return AtomModel::at(p, eq.x_H_inf, eq.x_C_inf);
}

}  // namespace

TEST_CASE("adjoint right-hand side is minus the state gradient of H") {
  const auto a = atoms();
  const OdeState s{1.7, 1.1};
  const AdjointState adj{0.3, -0.8, 0.2, 0.05, -1};
  const DosePair u{1.2, 3.0};
  const ConstraintLevels c{1.62, 1.5};
  const double h = 1e-6;
  auto H = [&](double rH, double rC) { return hamiltonian(a, {rH, rC}, adj, u, c); };
  const double dH = (H(s.rho_H + h, s.rho_C) - H(s.rho_H - h, s.rho_C)) / (2 * h);
  const double dC = (H(s.rho_H, s.rho_C + h) - H(s.rho_H, s.rho_C - h)) / (2 * h);
  const auto rhs = adjoint_rhs(a, s, adj, u, c);
  CHECK(rhs[0] == doctest::Approx(-dH).epsilon(1e-7));
  CHECK(rhs[1] == doctest::Approx(-dC).epsilon(1e-7));
}

TEST_CASE("switching controls maximise the Hamiltonian") {
  const auto a = atoms();
  const ConstraintLevels c{1.62, 1.5};
  for (const AdjointState adj : {AdjointState{0.4, -1.0}, AdjointState{-0.2, 0.9}, AdjointState{1.0, 0.05},
                                 AdjointState{-0.01, -0.5}}) {
    const OdeState s{2.0, 1.5};
    const auto sw = switching_controls(a, s, adj);
    double best = -1e300;
    for (int i = 0; i <= 10000; ++i) best = std::max(best, psi(a, s, adj, a.u2_max * i / 10000.0));
    CHECK(psi(a, s, adj, sw.u2_star) >= best - 1e-9);
    const double h0 = hamiltonian(a, s, adj, {0.0, sw.u2_star}, c);
    const double h1 = hamiltonian(a, s, adj, {a.u1_max, sw.u2_star}, c);
    CHECK(hamiltonian(a, s, adj, {sw.u1_star, sw.u2_star}, c) == doctest::Approx(std::max(h0, h1)));
  }
}

TEST_CASE("singular switching function") {
  const auto a = atoms();
  const OdeState s{2.0, 1.0};
  // mu_H p_H rho_H + mu_C p_C rho_C = 0
  const AdjointState adj{a.mu_C * s.rho_C, -a.mu_H * s.rho_H};
  CHECK(switching_controls(a, s, adj).singular);
}

TEST_CASE("hypothesis report at the reference holiday dose") {
  const auto p = paper_params();
  const auto rep = check_hypotheses(p, {0.0, 0.5});
  REQUIRE(rep.find("sensitivity_order") != nullptr);
  CHECK(rep.find("sensitivity_order")->pass);
  CHECK(rep.gamma == doctest::Approx(1.5));
  CHECK(rep.rho_H0 == doctest::Approx(2.7077).epsilon(1e-4));
  CHECK(rep.to_json().contains("checks"));

  auto q = p;
  q.alpha_H = q.alpha_C;
  const auto bad = check_hypotheses(q, {0.0, 0.5});
  CHECK_FALSE(bad.find("sensitivity_order")->pass);
  CHECK_FALSE(bad.ok());
}

TEST_CASE("second-phase synthesis on a short horizon") {
  const auto p = paper_params();
  SynthesisOptions o;
  o.dt = 2e-3;
  o.tf_candidates = 10;
  o.tau_candidates = 4;
  o.require_hypotheses = false;
  // MTD alone stays feasible for T2 below ~0.45, so the synthesis cannot do worse there
  const auto s = synthesize_second_phase(p, {0.0, 0.5}, 0.4, o);
  CHECK(s.final_rho_C <= s.mtd_only_rho_C * (1 + 1e-9));

  const auto r = synthesize_second_phase(p, {0.0, 0.5}, 1.0, o);
  REQUIRE(r.arcs.size() >= 2);
  CHECK(r.arcs.back().kind == ArcKind::h_boundary);
  CHECK(r.final_rho_C < r.traj.rho_C.front());
  CHECK(r.traj.size() == r.p_H.size());
  CHECK(r.mtd_phi_negative > 0.9);
  double prev = r.arcs.front().t_start;
  for (const auto& arc : r.arcs) {
    CHECK(arc.t_start == doctest::Approx(prev));
    prev = arc.t_end;
  }
  CHECK(r.to_json().contains("arcs"));
}

TEST_CASE("synthesis enforces its preconditions") {
  const auto p = paper_params();
  SynthesisOptions o;
  o.dt = 1e-2;
  o.tf_candidates = 4;
  o.tau_candidates = 2;
  if (!check_hypotheses(p, {0.0, 0.5}).ok()) CHECK_THROWS_AS(synthesize_second_phase(p, {0.0, 0.5}, 1.0, o), DomainError);
  o.require_hypotheses = false;
  o.start = OdeState{1.0, 5.0};  // g1 far below theta_HC
  CHECK_THROWS_AS(synthesize_second_phase(p, {0.0, 0.5}, 1.0, o), InfeasibleError);
}

TEST_CASE("Dirac optimality matches brute force") {
  const auto p = paper_params();
  const auto d = dirac_optimality(p, 0.5, 2.7, 201);
  double best = 1e300, xb = 0;
  for (int i = 0; i <= 20000; ++i) {
    const double x = i / 20000.0;
    const double v = growth_rate_C(p, x, 0.5, 2.7, p.mtd());
    if (v < best) best = v, xb = x;
  }
  CHECK(d.value <= best + 1e-9);
  CHECK(d.x_C == doctest::Approx(xb).epsilon(1e-3).scale(1.0));
}

TEST_CASE("logistic closed form") {
  CHECK(logistic(1.0, 1.0, 0.5, 0.0) == doctest::Approx(0.5));
  CHECK(logistic(1.0, 2.0, 0.1, 50.0) == doctest::Approx(0.5));
  const double h = 1e-5, r = 0.7, d = 0.3, rho0 = 0.4, t = 1.3;
  const double v = logistic(r, d, rho0, t);
  CHECK((logistic(r, d, rho0, t + h) - logistic(r, d, rho0, t - h)) / (2 * h) ==
        doctest::Approx((r - d * v) * v).epsilon(1e-6));
}

TEST_CASE("toy with concentrated budget: the infimum is approached but not attained") {
  const auto t = toy_c1(1.0, 1.0, 1.0, 0.5, 1.0, 1.0);
  REQUIRE(t.epsilon_values.size() == 3);
  for (std::size_t i = 0; i + 1 < t.epsilon_values.size(); ++i) CHECK(t.epsilon_values[i + 1] < t.epsilon_values[i]);
  CHECK(t.epsilon_values.back() > t.inf_value);
  CHECK(t.epsilon_values.back() - t.inf_value < 1e-3);
  CHECK(t.inf_value < t.rho_free);
}

TEST_CASE("toy with bounded dose: bang-bang at the end of the horizon") {
  const auto t = toy_c2(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 2.0);
  CHECK(t.T1 == doctest::Approx(0.5));
  CHECK(t.switch_numeric == doctest::Approx(0.5).epsilon(0.02));
  CHECK(t.value_numeric == doctest::Approx(t.value).epsilon(5e-3));
  CHECK(t.schedule.at(0.25).u1 == 0.0);
  CHECK(t.schedule.at(0.75).u1 == 2.0);
}
