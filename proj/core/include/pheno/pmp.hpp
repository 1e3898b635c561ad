#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pheno/asymptotics.hpp"
#include "pheno/ode_reduce.hpp"
#include "pheno/strategies.hpp"

namespace pheno {

struct AdjointState {
  double p_H = 0, p_C = 0;
  double eta_1 = 0, eta_2 = 0;  // constraint multipliers, >= 0
  double p0 = -1;
};

struct HypothesisCheck {
  std::string id;
  std::vector<double> values;  // raw left/right sides or evaluated quantities
  bool applicable = true;
  bool pass = false;
  std::string note;
};

struct HypothesisReport {
  DosePair u_bar;
  double x_H = 0, x_C = 0;
  double rho_H0 = 0;
  double gamma = 0;
  double r_d = 0, d_b = 0;
  std::vector<HypothesisCheck> checks;

  /// All applicable checks pass and none is inapplicable.
  bool ok() const;
  const HypothesisCheck* find(const std::string& id) const;
  nlohmann::json to_json() const;
};

/// rho_H0 defaults to the healthy equilibrium total at u_bar.
HypothesisReport check_hypotheses(const ModelParams& p, const DosePair& u_bar,
                                  std::optional<double> rho_H0 = std::nullopt);

/// Constraint levels for the Hamiltonian: theta_H rho_H0 and gamma.
struct ConstraintLevels {
  double theta_H_rho_H0 = 0;
  double gamma = 1.5;
};

double hamiltonian(const AtomModel& a, const OdeState& s, const AdjointState& adj, const DosePair& u,
                   const ConstraintLevels& c);
std::array<double, 2> adjoint_rhs(const AtomModel& a, const OdeState& s, const AdjointState& adj, const DosePair& u,
                                  const ConstraintLevels& c);

struct SwitchingResult {
  double phi_1 = 0;
  double u1_star = 0;
  bool singular = false;
  double u2_star = 0;
  std::array<double, 3> P{};  // P(u) = P[0] u^2 + P[1] u + P[2]; psi' has the sign of -P
  std::vector<double> candidates;
};

SwitchingResult switching_controls(const AtomModel& a, const OdeState& s, const AdjointState& adj,
                                   double singular_tol = 1e-8);
double psi(const AtomModel& a, const OdeState& s, const AdjointState& adj, double u2);

struct SynthesisOptions {
  double dt = 1e-3;
  int tf_candidates = 40;
  int tau_candidates = 20;
  double hc_tol = 1e-3;
  double rho_H0 = std::numeric_limits<double>::quiet_NaN();  // default: healthy equilibrium total
  std::optional<OdeState> start;                             // default: equilibrium at u_bar
  bool require_hypotheses = true;
  double one_only_tol = 1e-6;
};

struct Junction {
  double t = 0;
  std::string kind;  // "enter-H", "exit-HC"
  double nu = std::numeric_limits<double>::quiet_NaN();
};

struct SynthesisResult {
  double t_f = 0, tau1 = 0;
  std::vector<Arc> arcs;  // times relative to phase-2 start
  OdeTrajectory traj;
  std::vector<double> p_H, p_C, eta_1, eta_2, phi_1, H;  // backward adjoint, on traj.t
  std::vector<Junction> junctions;
  double final_rho_C = 0;
  double mtd_only_rho_C = 0;       // MTD throughout [0, T2]
  double mtd_phi_negative = 0;     // share of MTD-arc points with phi_1 < 0
  double mtd_H_variation = 0;      // relative spread of H along the MTD arc
  bool on_hc_at_start = false;
  HypothesisReport hypotheses;
  nlohmann::json to_json() const;
};

/// Forward shooting over the family [HC arc tau1] -> MTD -> H-boundary on [0, t_f], t_f <= T2,
/// with a backward adjoint check. Throws InfeasibleError if g1 < theta_HC at the start.
SynthesisResult synthesize_second_phase(const ModelParams& p, const DosePair& u_bar, double T2,
                                        const SynthesisOptions& opt = {});

struct DiracOptimality {
  double x_C = 0;
  double value = 0;
  std::size_t node = 0;
  bool unique = true;
};

/// argmin_x R_C(x, rho_C0, rho_H0, u1_max, u2_max) on an n-node grid, golden refined.
DiracOptimality dirac_optimality(const ModelParams& p, double rho_C0, double rho_H0, std::size_t n = 1001);

struct ToyC1 {
  double rho_free = 0;
  double inf_value = 0;
  std::vector<double> epsilons;
  std::vector<double> epsilon_values;
};

/// Logistic rho' = (r - d rho - mu u) rho, budget int u <= B.
double logistic(double r, double d, double rho0, double t);
ToyC1 toy_c1(double r, double d, double mu, double rho0, double T, double budget,
             const std::vector<double>& epsilons = {0.1, 0.01, 0.001});

struct ToyC2 {
  double T1 = 0;
  ControlSchedule schedule;
  double value = 0;
  bool saturated = false;
  std::string note;
  std::vector<double> u_numeric;  // projected-gradient optimum on n cells
  double switch_numeric = 0;
  double value_numeric = 0;
};

/// u in [0, u_inf_max], int u <= budget.
ToyC2 toy_c2(double r, double d, double mu, double rho0, double T, double budget, double u_inf_max,
             std::size_t cells = 100);

}  // namespace pheno
