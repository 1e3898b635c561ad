#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pheno/asymptotics.hpp"
#include "pheno/ide_sim.hpp"
#include "pheno/model.hpp"

namespace pheno {

/// Model data frozen at the concentration phenotypes (x_H, x_C).
struct AtomModel {
  double x_H = 0, x_C = 0;
  double r_H = 0, d_H = 0, mu_H = 0, r_C = 0, d_C = 0, mu_C = 0;
  double alpha_H = 0, alpha_C = 0;
  double a_HH = 0, a_HC = 0, a_CH = 0, a_CC = 0;
  double u1_max = 0, u2_max = 0, theta_HC = 0, theta_H = 0;

  static AtomModel at(const ModelParams& p, double x_H, double x_C);
  double gamma() const { return (1 - theta_HC) / theta_HC; }
  double R_H(double rho_H, double rho_C, const DosePair& u) const;
  double R_C(double rho_H, double rho_C, const DosePair& u) const;
};

struct OdeState {
  double rho_H = 0, rho_C = 0;
};

struct OdeTrajectory {
  std::vector<double> t, rho_H, rho_C, u1, u2;
  std::vector<int> mode;
  std::size_t size() const { return t.size(); }
};

/// Dose at step start; may update the mode flag.
using OdeDoseRule = std::function<DosePair(double t, const OdeState& s, int& mode)>;

OdeTrajectory simulate_ode(const AtomModel& a, const OdeState& init, const ControlSchedule& schedule, double T,
                           double dt, double t0 = 0.0);
OdeTrajectory simulate_ode(const AtomModel& a, const OdeState& init, const OdeDoseRule& rule, double T, double dt,
                           double t0 = 0.0, int initial_mode = 0);
OdeTrajectory simulate_ode(const ModelParams& p, double x_H, double x_C, const OdeState& init,
                           const ControlSchedule& schedule, double T, double dt);

/// One classical RK4 step with a frozen dose.
OdeState rk4_step(const AtomModel& a, const OdeState& s, const DosePair& u, double dt);

struct GapOptions {
  std::size_t nx = 201;
  double dt = 1e-3;
  double ode_dt = 1e-3;
  bool corrector = true;
};

struct ReductionGap {
  double sup_gap = 0;
  std::vector<double> t, gap_H, gap_C;
  double x_H = 0, x_C = 0;
};

/// Phase-2 schedule is expressed on [0, T2] and shifted by T1.
ReductionGap reduction_gap(const ModelParams& p, const DosePair& u_bar, double T1, const ControlSchedule& phase2,
                           double T2, const GapOptions& opt = {});
/// Same comparison starting from given densities at t = 0.
ReductionGap reduction_gap_from(const ModelParams& p, const Density& n_H, const Density& n_C, double x_H, double x_C,
                                const ControlSchedule& phase2, double T2, const GapOptions& opt = {});

struct CurabilityReport {
  double drho_H = 0, drho_C = 0, dratio = 0;  // at (rho_H_inf, rho_C_inf) under MTD
  bool rho_H_decreasing = false, rho_C_decreasing = false, ratio_decreasing = false;
  bool ratio_defined = true;
  std::optional<double> first_failure;  // along the forward MTD trajectory
  bool ok() const { return rho_H_decreasing && rho_C_decreasing && ratio_decreasing && !first_failure; }
};

CurabilityReport check_decreasing(const ModelParams& p, const DosePair& u_bar, double horizon = 5.0,
                                  double dt = 1e-3);

}  // namespace pheno
