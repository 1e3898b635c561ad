#include <doctest.h>

#include <cmath>
#include <random>

#include "pheno/asymptotics.hpp"
#include "pheno/ide_sim.hpp"
#include "pheno/strategies.hpp"

using namespace pheno;

namespace {

std::vector<DosePair> dose_grid(const ModelParams& p) {
  std::vector<DosePair> out;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) out.push_back({p.u1_max * i / 4.0, p.u2_max * j / 4.0});
  return out;
}

SimOptions fast() {
  SimOptions o;
  o.dt = 1e-2;
  o.n_snapshots = 0;
  return o;
}

}  // namespace

TEST_CASE("positivity under random piecewise-constant doses") {
  const auto p = paper_params();
  auto [h, c] = paper_initial(make_grid(81));
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> u1(20), u2(20);
    for (int k = 0; k < 20; ++k) u1[k] = p.u1_max * U(rng), u2[k] = p.u2_max * U(rng);
    const auto tr = simulate(p, h, c, ControlSchedule::uniform(u1, u2, 10.0), 10.0, fast());
    for (std::size_t k = 0; k < tr.size(); ++k) {
      CHECK(tr.rho_H[k] > 0);
      CHECK(tr.rho_C[k] > 0);
    }
    for (double v : tr.final_H.values) CHECK(v >= 0);
    for (double v : tr.final_C.values) CHECK(v >= 0);
  }
}

TEST_CASE("mass linearity") {
  auto p = paper_params();
  auto g = make_grid(81);
  auto [h, c] = paper_initial(g);
  // totals are the quadrature of the densities
  const auto tr = simulate(p, h, c, mtd_schedule(p, 2.0), 2.0, fast());
  CHECK(tr.rho_H.back() == doctest::Approx(total_mass(tr.final_H)).epsilon(1e-12));
  CHECK(tr.rho_C.back() == doctest::Approx(total_mass(tr.final_C)).epsilon(1e-12));
  // without competition the equation is linear in the initial data
  p.a_HH = p.a_HC = p.a_CH = p.a_CC = 0.0;
  const auto a = simulate(p, h, c, constant_schedule({1.0, 1.0}, 2.0), 2.0, fast());
  const auto b = simulate(p, 3.0 * h, 3.0 * c, constant_schedule({1.0, 1.0}, 2.0), 2.0, fast());
  CHECK(b.rho_H.back() == doctest::Approx(3.0 * a.rho_H.back()).epsilon(1e-12));
  CHECK(b.rho_C.back() == doctest::Approx(3.0 * a.rho_C.back()).epsilon(1e-12));
}

TEST_CASE("quadrature Richardson ratio") {
  auto err = [](std::size_t n) {
    auto g = make_grid(n);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(g->x(i)) * std::cos(3 * g->x(i));
    const double exact = (std::exp(1.0) * (std::cos(3.0) + 3 * std::sin(3.0)) - 1.0) / 10.0;
    return std::abs(g->integrate(f) - exact);
  };
  CHECK(err(51) / err(101) == doctest::Approx(4.0).epsilon(0.02));
  CHECK(err(101) / err(201) == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("equilibrium growth rates are nonpositive across the dose grid") {
  const auto p = paper_params();
  for (const auto& u : dose_grid(p)) {
    const auto e = equilibrium(p, u);
    double worst_H = -1e300, worst_C = -1e300;
    for (int i = 0; i <= 2000; ++i) {
      const double x = i / 2000.0;
      worst_H = std::max(worst_H, growth_rate_H(p, x, e.rho_H_inf, e.rho_C_inf, u));
      worst_C = std::max(worst_C, growth_rate_C(p, x, e.rho_C_inf, e.rho_H_inf, u));
    }
    CHECK(worst_H <= 1e-9);
    CHECK(worst_C <= 1e-9);
    if (e.rho_H_inf > 0) CHECK(growth_rate_H(p, e.x_H_inf, e.rho_H_inf, e.rho_C_inf, u) == doctest::Approx(0.0).scale(1.0));
    if (e.rho_C_inf > 0) CHECK(growth_rate_C(p, e.x_C_inf, e.rho_C_inf, e.rho_H_inf, u) == doctest::Approx(0.0).scale(1.0));
  }
}

TEST_CASE("without cytotoxic drug the selected phenotypes do not depend on the cytostatic dose") {
  const auto p = paper_params();
  const auto ref = equilibrium(p, {0.0, 0.0});
  for (int j = 1; j <= 4; ++j) {
    const auto e = equilibrium(p, {0.0, p.u2_max * j / 4.0});
    CHECK(e.x_H_inf == doctest::Approx(ref.x_H_inf).epsilon(1e-6));
    CHECK(e.x_C_inf == doctest::Approx(ref.x_C_inf).epsilon(1e-6));
  }
}
