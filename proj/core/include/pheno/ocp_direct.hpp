#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pheno/errors.hpp"
#include "pheno/ide_sim.hpp"
#include "pheno/model.hpp"

namespace pheno {

struct PathConstraints {
  bool hc = true;                   // g1 >= theta_HC
  bool h = true;                    // g2 >= theta_H
  std::optional<double> u1_budget;  // sum_k u1[k] dt <= budget
};

struct TranscribedProblem {
  ModelParams params;
  std::shared_ptr<const SampledModel> model;
  Density n_H0, n_C0;
  double T = 0;
  std::size_t Nt = 0;
  double rho_H0 = 0;
  PathConstraints constraints;

  std::size_t Nx() const { return model->grid->size(); }
  double time(std::size_t k) const { return step_time(0.0, T, Nt, k); }
};

/// Densities are resampled (linear interpolation) when their grid does not have Nx nodes.
TranscribedProblem transcribe(const ModelParams& p, const Density& n_H0, const Density& n_C0, double T,
                              std::size_t Nt, std::size_t Nx, const PathConstraints& c = {});
/// Gaussian initial data centred at 0.5, eps = 0.1, masses 2.7 / 0.5.
TranscribedProblem transcribe(const ModelParams& p, double T, std::size_t Nt, std::size_t Nx,
                              const PathConstraints& c = {});

struct ForwardResult {
  std::vector<double> t, rho_H, rho_C;  // Nt + 1 entries
  Density final_H, final_C;
};

ForwardResult forward(const TranscribedProblem& prob, const std::vector<double>& u1, const std::vector<double>& u2);

struct Gradient {
  double value = 0;                 // rho_C at the final node
  std::vector<double> d_u1, d_u2;   // d value / d u[k]
};

/// Exact gradient of the discretized rho_C(T) by reverse accumulation.
Gradient objective_gradient(const TranscribedProblem& prob, const std::vector<double>& u1,
                            const std::vector<double>& u2);

struct OptimizerConfig {
  int max_outer = 25;
  int max_inner = 400;
  double penalty0 = 10.0;
  double penalty_growth = 4.0;
  double penalty_max = 1e8;
  double feas_tol = 1e-4;
  double kkt_tol = 1e-6;
  double step_tol = 1e-10;
  double tv_weight = 0.0;
  double activity_tol = 2e-3;
  DosePair holiday{0.0, 0.5};
  std::vector<std::string> starts{"holiday", "mtd", "qp1", "two-phase"};
  int random_starts = 0;
  std::uint64_t seed = 0;
  /// Extra initial guesses (u1, u2 per step).
  std::vector<std::pair<std::vector<double>, std::vector<double>>> warm_starts;
};

struct ActivityInterval {
  std::string constraint;  // "HC" or "H"
  double t_start = 0, t_end = 0;
};

struct OcpSolution {
  std::vector<double> t, u1, u2;  // u on [t[k], t[k+1])
  ControlSchedule u_opt;
  std::vector<double> rho_H, rho_C, g1, g2;
  std::vector<double> lambda_HC, lambda_H;
  double rho_C_final = 0;
  double max_violation = 0;
  double kkt_stationarity = 0, kkt_complementarity = 0;
  std::vector<ActivityInterval> activity;
  std::string start;
  int outer_iterations = 0;
  nlohmann::json starts_summary = nlohmann::json::array();

  nlohmann::json activity_json() const;
  nlohmann::json to_json() const;
};

class OcpInfeasibleError : public InfeasibleError {
 public:
  OcpInfeasibleError(const std::string& what, OcpSolution least)
      : InfeasibleError(what), least_(std::make_shared<OcpSolution>(std::move(least))) {}
  const OcpSolution& least_infeasible() const { return *least_; }

 private:
  std::shared_ptr<OcpSolution> least_;
};

OcpSolution solve_ocp(const TranscribedProblem& prob, const OptimizerConfig& cfg = {});

/// Rollouts on the transcription grid used as initial guesses.
std::pair<std::vector<double>, std::vector<double>> initial_guess(const TranscribedProblem& prob,
                                                                  const std::string& kind,
                                                                  const OptimizerConfig& cfg = {});

struct ScanRow {
  double T = 0;
  std::size_t Nt = 0;
  double rho_C = 0;
  double max_violation = 0;
};

struct MonotonicityScan {
  std::vector<ScanRow> rows;
  std::vector<std::size_t> violations;  // i with rho_C(T_i) > rho_C(T_{i-1}) (1 + rel_tol)
  bool monotone() const { return violations.empty(); }
  nlohmann::json to_json() const;
};

/// Nt = round(T * steps_per_unit); later horizons are warm-started with the previous optimum placed at the end.
MonotonicityScan monotonicity_scan(const ModelParams& p, const std::vector<double>& T_list, const OptimizerConfig& cfg,
                                   double steps_per_unit = 20.0, std::size_t Nx = 101, double rel_tol = 1e-3);

struct ToyC2Direct {
  double T1 = 0;
  double switch_time = 0;
  double dt = 0;
  std::vector<double> u1;
  double value = 0;
};

/// One population with x-independent rates and an L1 budget, solved through the transcription.
ToyC2Direct toy_c2_direct(double r, double d, double mu, double rho0, double T, double budget, double u_inf_max,
                          std::size_t Nt = 50);

}  // namespace pheno
