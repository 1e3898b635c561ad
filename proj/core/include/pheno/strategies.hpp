#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pheno/ide_sim.hpp"
#include "pheno/ode_reduce.hpp"

namespace pheno {

ControlSchedule constant_schedule(const DosePair& u, double T);
ControlSchedule mtd_schedule(const ModelParams& p, double T);

struct BoundaryControl {
  double u1 = 0;       // clipped into [0, u1_max]
  double raw = 0;      // unclipped solution
  bool admissible = false;  // 0 < raw < u1_max
  bool clipped = false;
  bool singular = false;
};

/// Feedback on the healthy-count boundary: R_H(x_H, theta_H rho_H0, rho_C, (u1, v)) = 0.
BoundaryControl boundary_u1_on_H(const AtomModel& a, double rho_H0, double v, double rho_C);
BoundaryControl boundary_u1_on_H(const ModelParams& p, const EquilibriumReport& eq, double rho_H0, double v,
                                 double rho_C);
/// Relation R_H = R_C at rho_C = gamma rho_H, solved for u1.
BoundaryControl boundary_u1_on_HC(const AtomModel& a, double u2, double rho_H);
BoundaryControl boundary_u1_on_HC(const ModelParams& p, const EquilibriumReport& eq, double u2, double rho_H);

/// Density-weighted versions used on the full IDE: hold d rho_H/dt = 0, resp. d(rho_C/rho_H)/dt = 0.
BoundaryControl density_u1_on_H(const SampledModel& m, const std::vector<double>& n_H, const std::vector<double>& n_C,
                                double v);
BoundaryControl density_u1_on_HC(const SampledModel& m, const std::vector<double>& n_H,
                                 const std::vector<double>& n_C, double u2);

enum class ArcKind { phase1, holiday, hc_boundary, mtd, h_boundary };
const char* arc_name(ArcKind k);

struct Arc {
  ArcKind kind;
  double t_start = 0, t_end = 0;
};

struct StrategyOptions {
  std::size_t nx = 101;
  double dt = 1e-3;
  bool corrector = false;
  double hysteresis = 1e-3;
  int n_snapshots = 200;
};

struct TwoPhaseOptions : StrategyOptions {
  double tau1 = 0.0;            // maximal duration of the HC-boundary arc
  bool optimise_split = true;   // search T2 in (0, T2_max]; otherwise T2 = T2_max
  int split_candidates = 40;
  double hc_tol = 1e-3;         // HC arc only if |g1 - theta_HC| <= hc_tol at phase-2 start
};

struct TwoPhasePlan {
  DosePair u_bar;
  double T = 0, T1 = 0, T2 = 0, T2_max = 0;
  std::vector<Arc> arcs;
  Trajectory traj;
  bool guaranteed = true;       // curability check passed at u_bar
  std::vector<std::pair<double, double>> split_scan;  // (T2, rho_C(T))
  double final_rho_C() const { return traj.rho_C.back(); }
  nlohmann::json arcs_json() const;
};

/// Phase-2 policy: optional HC-boundary arc, MTD until rho_H hits theta_H rho_H0, then H-boundary with u2_max.
Policy second_phase_policy(const ModelParams& p, double t_start, const TwoPhaseOptions& opt, bool with_hc_arc);

TwoPhasePlan two_phase_plan(const ModelParams& p, const DosePair& u_bar, double T, double T2_max,
                            const TwoPhaseOptions& opt = {});
TwoPhasePlan two_phase_plan(const ModelParams& p, const Density& n_H0, const Density& n_C0, const DosePair& u_bar,
                            double T, double T2_max, const TwoPhaseOptions& opt = {});

/// Mode 0 holiday at u_bar, mode 1 MTD.
Policy quasi_periodic_policy_1(const ModelParams& p, const DosePair& holiday = {0.0, 0.5}, double hysteresis = 1e-3);
/// Adds mode 2: H-boundary arc with u2_max, left once rho_C stops decreasing.
Policy quasi_periodic_policy_2(const ModelParams& p, const DosePair& holiday = {0.0, 0.5}, double hysteresis = 1e-3);
/// MTD from t = 0, then the H-boundary arc (keeps the healthy-count constraint feasible).
Policy mtd_policy(const ModelParams& p, double hysteresis = 1e-3);

/// Arc list from a trajectory's mode series (mode names as in the policy).
std::vector<Arc> extract_arcs(const Trajectory& tr, const std::vector<ArcKind>& kinds);

/// Local minima of rho_C within each holiday-to-holiday cycle of a mode series.
std::vector<double> cycle_minima(const Trajectory& tr, int holiday_mode = 0);

/// Reference initial data: Gaussians centred at 0.5, eps = 0.1, masses 2.7 and 0.5.
std::pair<Density, Density> paper_initial(GridPtr grid);

}  // namespace pheno
