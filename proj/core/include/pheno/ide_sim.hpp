#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pheno/grid.hpp"
#include "pheno/model.hpp"

namespace pheno {

/// Piecewise-constant dose pair: doses[i] holds on [breaks[i], breaks[i+1]).
class ControlSchedule {
 public:
  ControlSchedule() = default;
  ControlSchedule(std::vector<double> breaks, std::vector<DosePair> doses);
  static ControlSchedule constant(const DosePair& u, double T);
  /// Uniform grid of n intervals on [0,T].
  static ControlSchedule uniform(const std::vector<double>& u1, const std::vector<double>& u2, double T);

  DosePair at(double t) const;
  double start() const { return breaks_.empty() ? 0.0 : breaks_.front(); }
  double end() const { return breaks_.empty() ? 0.0 : breaks_.back(); }
  bool empty() const { return doses_.empty(); }
  std::size_t pieces() const { return doses_.size(); }
  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<DosePair>& doses() const { return doses_; }
  double total_variation() const;
  void validate(const ModelParams& p) const;

  /// Extend with dose u up to time t_end (merged with the last piece when equal).
  void append(double t_end, const DosePair& u);
  void append(const ControlSchedule& other);

 private:
  std::vector<double> breaks_;
  std::vector<DosePair> doses_;
};

struct PolicyObservation {
  double t = 0.0;
  double rho_H = 0.0, rho_C = 0.0;
  double rho_H0 = 0.0;
  double rho_C_prev = std::numeric_limits<double>::quiet_NaN();  // previous step, NaN at start
  int mode = 0;
  const SampledModel* model = nullptr;
  const std::vector<double>* n_H = nullptr;
  const std::vector<double>* n_C = nullptr;
};

struct PolicyDecision {
  DosePair dose;
  int mode = 0;
};

/// Closed-loop decision rule. The mode flag is carried by the simulation loop.
struct Policy {
  std::string name;
  double hysteresis = 1e-3;
  int initial_mode = 0;
  std::vector<std::string> mode_names;
  std::function<PolicyDecision(const PolicyObservation&)> rule;
};

Policy constant_policy(const DosePair& u);

struct SimOptions {
  double dt = 1e-3;
  int n_snapshots = 200;  // 0 disables density dumps
  bool corrector = false;
  double t0 = 0.0;
  double rho_H0 = std::numeric_limits<double>::quiet_NaN();  // defaults to the initial rho_H
};

struct Snapshot {
  double t;
  Density n_H, n_C;
};

/// Entry k: state at t[k]; u1[k], u2[k] applied on [t[k], t[k+1]).
struct Trajectory {
  GridPtr grid;
  double rho_H0 = 0.0;
  std::vector<double> t, rho_H, rho_C, rho_CS, rho_CR, u1, u2, g1, g2;
  std::vector<int> mode;
  std::vector<std::string> mode_names;
  std::vector<Snapshot> snapshots;
  ControlSchedule schedule;
  Density final_H, final_C;

  std::size_t size() const { return t.size(); }
  double final_rho_C() const { return rho_C.back(); }
  /// Append `next`, which must start where this one ends.
  void extend(const Trajectory& next);
};

/// Multiplicative exponential Euler step on rate tables, rho frozen at step start
/// (optionally Heun-corrected on rho).
class ExponentialStepper {
 public:
  explicit ExponentialStepper(const SampledModel& m) : m_(&m) {}

  void rates(double rho_H, double rho_C, const DosePair& u, std::vector<double>& R_H,
             std::vector<double>& R_C) const;
  void step(std::vector<double>& n_H, std::vector<double>& n_C, const DosePair& u, double dt,
            bool corrector = false);

 private:
  const SampledModel* m_;
  std::vector<double> RH_, RC_, RH2_, RC2_, tmpH_, tmpC_;
};

/// k-th node of the uniform step grid t_k = t0 + T k / n (shared by simulator and optimizer).
double step_time(double t0, double T, std::size_t n, std::size_t k);
std::size_t step_count(double T, double dt);

Trajectory simulate(const ModelParams& p, const Density& n_H0, const Density& n_C0, const ControlSchedule& schedule,
                    double T, const SimOptions& opt = {});

Trajectory simulate_closed_loop(const ModelParams& p, const Density& n_H0, const Density& n_C0, const Policy& policy,
                                double T, const SimOptions& opt = {});

struct ConstraintReport {
  double min_g1_margin = 0.0;  // min_t g1 - theta_HC
  double min_g2_margin = 0.0;  // min_t g2 - theta_H
  std::optional<double> first_violation;
  std::string violated;  // "HC", "H" or empty
};

ConstraintReport constraint_report(const Trajectory& traj, const ModelParams& p, double tol = 0.0);

}  // namespace pheno
