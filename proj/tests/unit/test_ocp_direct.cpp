#include <doctest.h>

#include <cmath>
#include <random>

#include "pheno/ocp_direct.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

namespace {

std::pair<std::vector<double>, std::vector<double>> random_controls(std::size_t n, const ModelParams& p,
                                                                    unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> u1(n), u2(n);
  for (std::size_t k = 0; k < n; ++k) {
    u1[k] = p.u1_max * U(rng);
    u2[k] = p.u2_max * U(rng);
  }
  return {u1, u2};
}

}  // namespace

TEST_CASE("reverse-mode gradient agrees with finite differences") {
  const auto p = paper_params();
  const auto prob = transcribe(p, 2.0, 20, 21);
  auto [u1, u2] = random_controls(20, p, 7);
  const auto g = objective_gradient(prob, u1, u2);
  CHECK(g.value == doctest::Approx(forward(prob, u1, u2).rho_C.back()));
  const double h = 1e-6;
  for (std::size_t k : {0u, 7u, 19u}) {
    auto a = u1, b = u1;
    a[k] += h;
    b[k] -= h;
    const double fd1 = (forward(prob, a, u2).rho_C.back() - forward(prob, b, u2).rho_C.back()) / (2 * h);
    CHECK(g.d_u1[k] == doctest::Approx(fd1).epsilon(1e-5));
    auto c = u2, d = u2;
    c[k] += h;
    d[k] -= h;
    const double fd2 = (forward(prob, u1, c).rho_C.back() - forward(prob, u1, d).rho_C.back()) / (2 * h);
    CHECK(g.d_u2[k] == doctest::Approx(fd2).epsilon(1e-5));
  }
}

TEST_CASE("forward pass is the simulator on a uniform schedule") {
  const auto p = paper_params();
  const auto prob = transcribe(p, 3.0, 30, 41);
  auto [u1, u2] = random_controls(30, p, 3);
  const auto f = forward(prob, u1, u2);
  SimOptions o;
  o.dt = 0.1;
  o.n_snapshots = 0;
  const auto tr = simulate(p, prob.n_H0, prob.n_C0, ControlSchedule::uniform(u1, u2, 3.0), 3.0, o);
  REQUIRE(tr.size() == f.rho_C.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    CHECK(f.rho_C[k] == tr.rho_C[k]);
    CHECK(f.rho_H[k] == tr.rho_H[k]);
  }
}

TEST_CASE("transcription validation") {
  const auto p = paper_params();
  auto g = make_grid(21);
  CHECK_THROWS_AS(transcribe(p, gaussian_init(g, 0.5, 0.1, 0.5), gaussian_init(g, 0.5, 0.1, 2.7), 1.0, 10, 21),
                  InfeasibleError);
  const auto pr = transcribe(p, gaussian_init(g, 0.5, 0.1, 2.7), gaussian_init(g, 0.5, 0.1, 0.5), 1.0, 10, 41);
  CHECK(pr.Nx() == 41);
  CHECK(total_mass(pr.n_H0) == doctest::Approx(2.7).epsilon(1e-3));
  CHECK(pr.time(10) == 1.0);
}

TEST_CASE("initial guesses are admissible") {
  const auto p = paper_params();
  const auto prob = transcribe(p, 4.0, 40, 21);
  for (const char* kind : {"holiday", "mtd", "zero", "qp1", "two-phase"}) {
    const auto [u1, u2] = initial_guess(prob, kind);
    REQUIRE(u1.size() == 40);
    for (std::size_t k = 0; k < 40; ++k) {
      CHECK(u1[k] >= 0);
      CHECK(u1[k] <= p.u1_max);
      CHECK(u2[k] >= 0);
      CHECK(u2[k] <= p.u2_max);
    }
  }
  CHECK_THROWS_AS(initial_guess(prob, "nonsense"), DomainError);
}

TEST_CASE("small constrained solve") {
  const auto p = paper_params();
  const auto prob = transcribe(p, 3.0, 30, 21);
  OptimizerConfig cfg;
  cfg.starts = {"holiday", "mtd"};
  cfg.max_outer = 15;
  const auto sol = solve_ocp(prob, cfg);
  CHECK(sol.max_violation <= cfg.feas_tol);
  CHECK(sol.u1.size() == 30);
  CHECK(sol.rho_C.size() == 31);
  for (double l : sol.lambda_HC) CHECK(l >= 0);
  for (double l : sol.lambda_H) CHECK(l >= 0);
  // no worse than the holiday guess, which is feasible
  const auto [h1, h2] = initial_guess(prob, "holiday", cfg);
  CHECK(sol.rho_C_final <= forward(prob, h1, h2).rho_C.back() * (1 + 1e-9));
  CHECK(sol.to_json().contains("rho_C_final"));
  CHECK(sol.activity_json().contains("intervals"));
}

TEST_CASE("budget constraint is honoured") {
  const auto p = paper_params();
  PathConstraints c;
  c.hc = c.h = false;
  c.u1_budget = 0.5;
  const auto prob = transcribe(p, 2.0, 20, 21, c);
  OptimizerConfig cfg;
  cfg.starts = {"zero"};
  const auto sol = solve_ocp(prob, cfg);
  double used = 0;
  for (double v : sol.u1) used += v * 0.1;
  CHECK(used <= 0.5 + 1e-4);
}

TEST_CASE("toy problem through the transcription switches at T - B/umax") {
  const auto t = toy_c2_direct(1.0, 1.0, 1.0, 0.5, 1.0, 1.0, 2.0, 50);
  CHECK(t.T1 == doctest::Approx(0.5));
  CHECK(std::abs(t.switch_time - 0.5) <= 2 * t.dt + 1e-12);
}

TEST_CASE("scan rows are ordered by horizon") {
  OptimizerConfig cfg;
  cfg.starts = {"holiday"};
  cfg.max_outer = 6;
  const auto s = monotonicity_scan(paper_params(), {1.0, 2.0}, cfg, 10.0, 21);
  REQUIRE(s.rows.size() == 2);
  CHECK(s.rows[0].T == 1.0);
  CHECK(s.rows[1].Nt == 20);
  CHECK(s.to_json().contains("rows"));
}
