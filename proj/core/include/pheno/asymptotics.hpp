#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pheno/ide_sim.hpp"
#include "pheno/model.hpp"

namespace pheno {

/// (r/(1+alpha u2) - u1 mu) / d at x.
double fitness_ratio(const ModelParams& p, const DosePair& u_bar, Population pop, double x);

struct LimitIntensity {
  double I_inf = 0.0;
  double f_max = 0.0;            // max_x fitness_ratio, may be negative
  std::vector<double> argmax;    // refined maximisers, ties within 1e-8 of the max value
  bool extinct = false;          // f_max <= 0
  bool singleton() const { return argmax.size() == 1; }
};

LimitIntensity limit_intensity(const ModelParams& p, const DosePair& u_bar, Population pop,
                               std::size_t scan_points = 2001);

enum class Regime { coexistence, healthy_only, cancer_only, extinction };
const char* regime_name(Regime r);

struct EquilibriumReport {
  DosePair u_bar;
  double I_H_inf = 0, I_C_inf = 0;
  double rho_H_inf = 0, rho_C_inf = 0;
  double x_H_inf = 0, x_C_inf = 0;
  std::vector<double> A_H, A_C;
  bool singleton_H = true, singleton_C = true;
  Regime regime = Regime::coexistence;

  nlohmann::json to_json() const;
};

EquilibriumReport equilibrium(const ModelParams& p, const DosePair& u_bar);

struct SinglePopulationLimit {
  double I_inf = 0;
  double rho_inf = 0;
  std::vector<double> B_set;
  bool viable = true;            // r/(1+alpha u2) - u1 mu > 0 on [0,1]
  double min_drug_fitness = 0;   // min_x of that quantity
};

SinglePopulationLimit single_population_limit(const ModelParams& p, const DosePair& u_bar, Population pop);

using Mat2 = std::array<std::array<double, 2>, 2>;

/// M = A^T D + D A with D = diag(lambda_H, lambda_C).
Mat2 lyapunov_matrix(const ModelParams& p, double lambda_H, double lambda_C);
/// lambda = (1/a_HC, 1/a_CH)
Mat2 lyapunov_matrix(const ModelParams& p);
double det2(const Mat2& m);
/// 4 (a_HH a_CC - a_HC a_CH) / (a_HC a_CH)
double lyapunov_det_formula(const ModelParams& p);

struct LyapunovSeries {
  std::vector<double> t, V, V_H, V_C, quadratic_term, B_H, B_C;
  bool ln_undefined = false;
  std::size_t atom_H = 0, atom_C = 0;
};

/// Evaluated on the trajectory snapshots, with n^inf the discrete Dirac at the node nearest the argmax.
/// V_i = int m_i [n_i^inf ln(n_i^inf / n_i) + n_i - n_i^inf], which vanishes at equilibrium.
LyapunovSeries lyapunov_series(const ModelParams& p, const Trajectory& traj, const DosePair& u_bar,
                               const EquilibriumReport& rep);

/// -1/2 X^T M X with X = rho_inf - rho.
double lyapunov_quadratic(const ModelParams& p, const EquilibriumReport& rep, double rho_H, double rho_C);

struct SpeedFit {
  double exponent = 0;
  std::size_t points = 0;
  bool truncated = false;  // residual reached the 1e-12 floor
  bool ok = false;
};

struct SpeedDiagnostics {
  std::vector<double> t;  // snapshot times
  std::vector<double> residual_H, residual_C;          // int m_i R_i(x, rho_inf, u_bar) n_i dx
  std::vector<double> mass_outside_H, mass_outside_C;
  std::vector<double> t_rho, gap_rho_H, gap_rho_C;     // |rho_i - rho_i^inf|
  SpeedFit conc_H, conc_C;  // envelope vs ln t / t
  SpeedFit rho_H, rho_C;    // envelope vs (ln t / t)^(1/2)
  double min_exponent() const;
};

SpeedDiagnostics speed_diagnostics(const ModelParams& p, const Trajectory& traj, const EquilibriumReport& rep,
                                   double t_min = 10.0, double eps_ball = 0.05);

/// Fit exponent of the running envelope sup_{s>=t}|y(s)| against log(base(t)).
SpeedFit envelope_fit(const std::vector<double>& t, const std::vector<double>& y, double t_min, double power);

}  // namespace pheno
