#include "pheno/ocp_direct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pheno/numerics.hpp"
#include "pheno/strategies.hpp"

namespace pheno {

namespace {

Density resample(const Density& d, const GridPtr& g) {
  if (d.grid->size() == g->size()) return Density(g, d.values);
  const auto& src = *d.grid;
  const std::size_t m = src.size();
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double x = g->x(i);
    const double pos = x * (m - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(pos), m - 2);
    const double w = pos - j;
    v[i] = (1 - w) * d.values[j] + w * d.values[j + 1];
  }
  return Density(g, std::move(v));
}

// Forward states and step factors, stored for the reverse sweep.
struct Tape {
  std::size_t Nt = 0, Nx = 0;
  std::vector<double> nH, nC, EH, EC, rH, rC, dt;
};

void run_forward(const TranscribedProblem& pr, const std::vector<double>& u1, const std::vector<double>& u2, Tape& tp) {
  const auto& m = *pr.model;
  const auto& g = *m.grid;
  const std::size_t Nt = pr.Nt, Nx = g.size();
  tp.Nt = Nt;
  tp.Nx = Nx;
  tp.nH.resize((Nt + 1) * Nx);
  tp.nC.resize((Nt + 1) * Nx);
  tp.EH.resize(Nt * Nx);
  tp.EC.resize(Nt * Nx);
  tp.rH.resize(Nt + 1);
  tp.rC.resize(Nt + 1);
  tp.dt.resize(Nt);
  std::copy(pr.n_H0.values.begin(), pr.n_H0.values.end(), tp.nH.begin());
  std::copy(pr.n_C0.values.begin(), pr.n_C0.values.end(), tp.nC.begin());
  ExponentialStepper stepper(m);
  std::vector<double> RH, RC, h(Nx), c(Nx);
  for (std::size_t k = 0; k < Nt; ++k) {
    std::copy_n(tp.nH.begin() + k * Nx, Nx, h.begin());
    std::copy_n(tp.nC.begin() + k * Nx, Nx, c.begin());
    tp.rH[k] = g.integrate(h);
    tp.rC[k] = g.integrate(c);
    stepper.rates(tp.rH[k], tp.rC[k], {u1[k], u2[k]}, RH, RC);
    const double dt = pr.time(k + 1) - pr.time(k);
    tp.dt[k] = dt;
    for (std::size_t i = 0; i < Nx; ++i) {
      const double eh = std::exp(RH[i] * dt), ec = std::exp(RC[i] * dt);
      tp.EH[k * Nx + i] = eh;
      tp.EC[k * Nx + i] = ec;
      tp.nH[(k + 1) * Nx + i] = h[i] * eh;
      tp.nC[(k + 1) * Nx + i] = c[i] * ec;
    }
  }
  std::copy_n(tp.nH.begin() + Nt * Nx, Nx, h.begin());
  std::copy_n(tp.nC.begin() + Nt * Nx, Nx, c.begin());
  tp.rH[Nt] = g.integrate(h);
  tp.rC[Nt] = g.integrate(c);
}

// dH[k], dC[k]: sensitivities of the scalar w.r.t. rho_H[k], rho_C[k]; outputs d/du1, d/du2.
void run_backward(const TranscribedProblem& pr, const std::vector<double>& u2, const Tape& tp,
                  const std::vector<double>& dH, const std::vector<double>& dC, std::vector<double>& g1,
                  std::vector<double>& g2) {
  const auto& m = *pr.model;
  const auto& p = m.params;
  const auto& g = *m.grid;
  const std::size_t Nt = tp.Nt, Nx = tp.Nx;
  std::vector<double> w(Nx), lH(Nx), lC(Nx);
  for (std::size_t i = 0; i < Nx; ++i) w[i] = g.w(i);
  for (std::size_t i = 0; i < Nx; ++i) {
    lH[i] = w[i] * dH[Nt];
    lC[i] = w[i] * dC[Nt];
  }
  g1.assign(Nt, 0.0);
  g2.assign(Nt, 0.0);
  for (std::size_t k = Nt; k-- > 0;) {
    const double dt = tp.dt[k];
    const double* nH1 = &tp.nH[(k + 1) * Nx];
    const double* nC1 = &tp.nC[(k + 1) * Nx];
    const double* EH = &tp.EH[k * Nx];
    const double* EC = &tp.EC[k * Nx];
    const double sH = -p.alpha_H / ((1 + p.alpha_H * u2[k]) * (1 + p.alpha_H * u2[k]));
    const double sC = -p.alpha_C / ((1 + p.alpha_C * u2[k]) * (1 + p.alpha_C * u2[k]));
    double sigH = 0, sigC = 0, gu1 = 0, gu2 = 0;
    for (std::size_t i = 0; i < Nx; ++i) {
      const double qH = lH[i] * nH1[i] * dt, qC = lC[i] * nC1[i] * dt;
      sigH -= qH * m.d_H[i];
      sigC -= qC * m.d_C[i];
      gu1 -= qH * m.mu_H[i] + qC * m.mu_C[i];
      gu2 += qH * m.r_H[i] * sH + qC * m.r_C[i] * sC;
    }
    g1[k] = gu1;
    g2[k] = gu2;
    const double cH = p.a_HH * sigH + p.a_CH * sigC + dH[k];
    const double cC = p.a_HC * sigH + p.a_CC * sigC + dC[k];
    for (std::size_t i = 0; i < Nx; ++i) {
      lH[i] = lH[i] * EH[i] + w[i] * cH;
      lC[i] = lC[i] * EC[i] + w[i] * cC;
    }
  }
}

double c_hc(const ModelParams& p, double h, double c) { return h / (h + c) - p.theta_HC; }
double c_h(const TranscribedProblem& pr, double h) { return h / pr.rho_H0 - pr.params.theta_H; }

struct Multipliers {
  std::vector<double> hc, h;
  double budget = 0;
};

struct ConstraintValues {
  std::vector<double> hc, h;  // nodes 1..Nt stored at index k
  double budget = 0;
  double max_violation = 0;
};

ConstraintValues constraints_of(const TranscribedProblem& pr, const Tape& tp, const std::vector<double>& u1) {
  ConstraintValues cv;
  const std::size_t Nt = pr.Nt;
  cv.hc.assign(Nt + 1, 0.0);
  cv.h.assign(Nt + 1, 0.0);
  for (std::size_t k = 1; k <= Nt; ++k) {
    if (pr.constraints.hc) {
      cv.hc[k] = c_hc(pr.params, tp.rH[k], tp.rC[k]);
      cv.max_violation = std::max(cv.max_violation, -cv.hc[k]);
    }
    if (pr.constraints.h) {
      cv.h[k] = c_h(pr, tp.rH[k]);
      cv.max_violation = std::max(cv.max_violation, -cv.h[k]);
    }
  }
  if (pr.constraints.u1_budget) {
    double s = 0;
    for (std::size_t k = 0; k < Nt; ++k) s += u1[k] * tp.dt[k];
    cv.budget = *pr.constraints.u1_budget - s;
    cv.max_violation = std::max(cv.max_violation, -cv.budget);
  }
  return cv;
}

// Augmented Lagrangian in scaled variables x = (u1/u1_max, u2/u2_max).
class AugLag {
 public:
  AugLag(const TranscribedProblem& pr, const OptimizerConfig& cfg) : pr_(pr), cfg_(cfg) {}

  double operator()(const std::vector<double>& x, std::vector<double>& grad, const Multipliers& lam, double mu,
                    bool lagrangian_only = false) {
    const std::size_t Nt = pr_.Nt;
    const auto& p = pr_.params;
    unpack(x);
    run_forward(pr_, u1_, u2_, tape_);
    std::vector<double> dH(Nt + 1, 0.0), dC(Nt + 1, 0.0);
    double f = std::log(tape_.rC[Nt]);
    dC[Nt] = 1.0 / tape_.rC[Nt];
    // psi(c) = (max(0, lam - mu c)^2 - lam^2) / (2 mu); in Lagrangian mode: -lam c
    auto term = [&](double c, double l, double& dpsi) {
      if (lagrangian_only) {
        dpsi = -l;
        return -l * c;
      }
      const double s = std::max(0.0, l - mu * c);
      dpsi = -s;
      return (s * s - l * l) / (2 * mu);
    };
    for (std::size_t k = 1; k <= Nt; ++k) {
      const double h = tape_.rH[k], c = tape_.rC[k];
      double dp;
      if (pr_.constraints.hc) {
        f += term(c_hc(p, h, c), lam.hc[k], dp);
        const double s2 = (h + c) * (h + c);
        dH[k] += dp * c / s2;
        dC[k] -= dp * h / s2;
      }
      if (pr_.constraints.h) {
        f += term(c_h(pr_, h), lam.h[k], dp);
        dH[k] += dp / pr_.rho_H0;
      }
    }
    run_backward(pr_, u2_, tape_, dH, dC, g1_, g2_);
    if (pr_.constraints.u1_budget) {
      double s = 0;
      for (std::size_t k = 0; k < Nt; ++k) s += u1_[k] * tape_.dt[k];
      double dp;
      f += term(*pr_.constraints.u1_budget - s, lam.budget, dp);
      for (std::size_t k = 0; k < Nt; ++k) g1_[k] -= dp * tape_.dt[k];
    }
    grad.assign(2 * Nt, 0.0);
    for (std::size_t k = 0; k < Nt; ++k) {
      grad[k] = g1_[k] * p.u1_max;
      grad[Nt + k] = g2_[k] * p.u2_max;
    }
    if (cfg_.tv_weight > 0) {
      const double eps2 = 1e-8;
      for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t k = 0; k + 1 < Nt; ++k) {
          const double d = x[b * Nt + k + 1] - x[b * Nt + k];
          const double r = std::sqrt(d * d + eps2);
          f += cfg_.tv_weight * r;
          grad[b * Nt + k + 1] += cfg_.tv_weight * d / r;
          grad[b * Nt + k] -= cfg_.tv_weight * d / r;
        }
    }
    return f;
  }

  void unpack(const std::vector<double>& x) {
    const std::size_t Nt = pr_.Nt;
    u1_.resize(Nt);
    u2_.resize(Nt);
    for (std::size_t k = 0; k < Nt; ++k) {
      u1_[k] = x[k] * pr_.params.u1_max;
      u2_[k] = x[Nt + k] * pr_.params.u2_max;
    }
  }

  const Tape& tape() const { return tape_; }
  const std::vector<double>& u1() const { return u1_; }
  const std::vector<double>& u2() const { return u2_; }

 private:
  const TranscribedProblem& pr_;
  const OptimizerConfig& cfg_;
  Tape tape_;
  std::vector<double> u1_, u2_, g1_, g2_;
};

std::vector<ActivityInterval> activity_of(const TranscribedProblem& pr, const std::vector<double>& c,
                                          const char* name, double tol) {
  std::vector<ActivityInterval> out;
  bool open = false;
  ActivityInterval cur{name, 0, 0};
  for (std::size_t k = 1; k <= pr.Nt; ++k) {
    const bool act = c[k] <= tol;
    if (act && !open) {
      cur.t_start = pr.time(k);
      open = true;
    }
    if (act) cur.t_end = pr.time(k);
    if (!act && open) {
      out.push_back(cur);
      open = false;
    }
  }
  if (open) out.push_back(cur);
  return out;
}

}  // namespace

TranscribedProblem transcribe(const ModelParams& p, const Density& n_H0, const Density& n_C0, double T,
                              std::size_t Nt, std::size_t Nx, const PathConstraints& c) {
  if (Nt < 1 || Nx < 2) throw DomainError("transcription needs Nt >= 1 and Nx >= 2");
  if (!(T > 0)) throw DomainError("horizon must be positive");
  if (!n_H0.grid || !n_C0.grid) throw DomainError("initial densities need a grid");
  TranscribedProblem pr;
  pr.params = p;
  auto g = n_H0.grid->size() == Nx ? n_H0.grid : make_grid(Nx);
  pr.model = std::make_shared<SampledModel>(p, g);
  pr.n_H0 = resample(n_H0, g);
  pr.n_C0 = resample(n_C0, g);
  pr.T = T;
  pr.Nt = Nt;
  pr.rho_H0 = total_mass(pr.n_H0);
  pr.constraints = c;
  const double rH = pr.rho_H0, rC = total_mass(pr.n_C0);
  if (c.hc && (rH + rC <= 0 || c_hc(p, rH, rC) < 0)) {
    std::ostringstream os;
    os << "infeasible initial state: g1(0)=" << (rH + rC > 0 ? rH / (rH + rC) : 0.0) << " < theta_HC=" << p.theta_HC;
    throw InfeasibleError(os.str());
  }
  if (c.h && !(rH > 0)) throw InfeasibleError("infeasible initial state: no healthy cells");
  return pr;
}

TranscribedProblem transcribe(const ModelParams& p, double T, std::size_t Nt, std::size_t Nx,
                              const PathConstraints& c) {
  auto [h, cc] = paper_initial(make_grid(Nx));
  return transcribe(p, h, cc, T, Nt, Nx, c);
}

ForwardResult forward(const TranscribedProblem& prob, const std::vector<double>& u1, const std::vector<double>& u2) {
  if (u1.size() != prob.Nt || u2.size() != prob.Nt) throw DomainError("dose vectors must have Nt entries");
  Tape tp;
  run_forward(prob, u1, u2, tp);
  ForwardResult r;
  r.rho_H = tp.rH;
  r.rho_C = tp.rC;
  for (std::size_t k = 0; k <= prob.Nt; ++k) r.t.push_back(prob.time(k));
  const std::size_t Nx = tp.Nx;
  r.final_H = Density(prob.model->grid, std::vector<double>(tp.nH.end() - Nx, tp.nH.end()));
  r.final_C = Density(prob.model->grid, std::vector<double>(tp.nC.end() - Nx, tp.nC.end()));
  return r;
}

Gradient objective_gradient(const TranscribedProblem& prob, const std::vector<double>& u1,
                            const std::vector<double>& u2) {
  if (u1.size() != prob.Nt || u2.size() != prob.Nt) throw DomainError("dose vectors must have Nt entries");
  for (std::size_t k = 0; k < prob.Nt; ++k) check_dose(prob.params, {u1[k], u2[k]});
  Tape tp;
  run_forward(prob, u1, u2, tp);
  std::vector<double> dH(prob.Nt + 1, 0.0), dC(prob.Nt + 1, 0.0);
  dC[prob.Nt] = 1.0;
  Gradient g;
  g.value = tp.rC[prob.Nt];
  run_backward(prob, u2, tp, dH, dC, g.d_u1, g.d_u2);
  return g;
}

std::pair<std::vector<double>, std::vector<double>> initial_guess(const TranscribedProblem& prob,
                                                                  const std::string& kind,
                                                                  const OptimizerConfig& cfg) {
  const auto& p = prob.params;
  const std::size_t Nt = prob.Nt;
  std::vector<double> u1(Nt), u2(Nt);
  auto fill = [&](const DosePair& u) {
    std::fill(u1.begin(), u1.end(), u.u1);
    std::fill(u2.begin(), u2.end(), u.u2);
  };
  auto sample = [&](const ControlSchedule& s) {
    for (std::size_t k = 0; k < Nt; ++k) {
      const auto u = s.at(0.5 * (prob.time(k) + prob.time(k + 1)));
      u1[k] = std::clamp(u.u1, 0.0, p.u1_max);
      u2[k] = std::clamp(u.u2, 0.0, p.u2_max);
    }
  };
  const double dt = prob.T / Nt;
  if (kind == "holiday") {
    fill(cfg.holiday);
  } else if (kind == "mtd") {
    fill(p.mtd());
  } else if (kind == "zero") {
    fill({0.0, 0.0});
  } else if (kind == "qp1") {
    SimOptions so;
    so.dt = dt;
    so.n_snapshots = 0;
    const auto tr = simulate_closed_loop(p, prob.n_H0, prob.n_C0, quasi_periodic_policy_1(p, cfg.holiday), prob.T, so);
    sample(tr.schedule);
  } else if (kind == "two-phase") {
    TwoPhaseOptions o;
    o.dt = dt;
    o.n_snapshots = 0;
    o.split_candidates = 20;
    const auto plan = two_phase_plan(p, prob.n_H0, prob.n_C0, cfg.holiday, prob.T, 0.5 * prob.T, o);
    sample(plan.traj.schedule);
  } else {
    throw DomainError("unknown initial guess '" + kind + "'");
  }
  return {u1, u2};
}

nlohmann::json OcpSolution::activity_json() const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& i : activity) a.push_back({{"constraint", i.constraint}, {"t_start", i.t_start}, {"t_end", i.t_end}});
  return {{"intervals", a},
          {"max_violation", max_violation},
          {"kkt_stationarity", kkt_stationarity},
          {"kkt_complementarity", kkt_complementarity}};
}

nlohmann::json OcpSolution::to_json() const {
  return {{"rho_C_final", rho_C_final},   {"max_violation", max_violation},   {"kkt_stationarity", kkt_stationarity},
          {"kkt_complementarity", kkt_complementarity}, {"start", start}, {"outer_iterations", outer_iterations},
          {"activity", activity_json()},  {"starts", starts_summary}};
}

OcpSolution solve_ocp(const TranscribedProblem& prob, const OptimizerConfig& cfg) {
  const std::size_t Nt = prob.Nt;
  const auto& p = prob.params;
  std::vector<std::pair<std::string, std::pair<std::vector<double>, std::vector<double>>>> starts;
  for (const auto& s : cfg.starts) starts.emplace_back(s, initial_guess(prob, s, cfg));
  for (std::size_t i = 0; i < cfg.warm_starts.size(); ++i)
    starts.emplace_back("warm-" + std::to_string(i), cfg.warm_starts[i]);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < cfg.random_starts; ++i) {
    std::vector<double> a(Nt), b(Nt);
    for (auto& v : a) v = U(rng) * p.u1_max;
    for (auto& v : b) v = U(rng) * p.u2_max;
    starts.emplace_back("random-" + std::to_string(i), std::make_pair(a, b));
  }
  if (starts.empty()) throw DomainError("no initial guesses configured");

  struct Candidate {
    std::vector<double> x;
    Multipliers lam;
    double rho_C = 0, violation = 0, pg = 0;
    int outer = 0;
    std::string start;
  };
  std::optional<Candidate> best_feasible, least_infeasible;
  nlohmann::json summary = nlohmann::json::array();
  AugLag al(prob, cfg);
  auto project = [](std::vector<double>& x) { project_box(x, 0.0, 1.0); };

  for (const auto& [name, guess] : starts) {
    std::vector<double> x(2 * Nt);
    for (std::size_t k = 0; k < Nt; ++k) {
      x[k] = p.u1_max > 0 ? std::clamp(guess.first[k] / p.u1_max, 0.0, 1.0) : 0.0;
      x[Nt + k] = p.u2_max > 0 ? std::clamp(guess.second[k] / p.u2_max, 0.0, 1.0) : 0.0;
    }
    Multipliers lam{std::vector<double>(Nt + 1, 0.0), std::vector<double>(Nt + 1, 0.0), 0.0};
    double mu = cfg.penalty0, prev_viol = std::numeric_limits<double>::infinity();
    Candidate run_best;
    bool have = false;
    int outer = 0;
    for (; outer < cfg.max_outer; ++outer) {
      SpgOptions so;
      so.max_iter = cfg.max_inner;
      so.pg_tol = cfg.kkt_tol;
      const auto res = spg_minimize([&](const std::vector<double>& v, std::vector<double>& g) { return al(v, g, lam, mu); },
                                    project, x, so);
      const bool stalled = std::sqrt([&] {
                             double s = 0;
                             for (std::size_t i = 0; i < x.size(); ++i) s += (res.x[i] - x[i]) * (res.x[i] - x[i]);
                             return s;
                           }()) < cfg.step_tol;
      x = res.x;
      std::vector<double> g;
      al(x, g, lam, mu);
      const auto cv = constraints_of(prob, al.tape(), al.u1());
      const double rc = al.tape().rC[Nt];
      Candidate c{x, lam, rc, cv.max_violation, res.pg_norm, outer + 1, name};
      const bool feasible = cv.max_violation <= cfg.feas_tol;
      if (!have || (feasible && (run_best.violation > cfg.feas_tol || rc < run_best.rho_C)) ||
          (!feasible && run_best.violation > cfg.feas_tol && cv.max_violation < run_best.violation)) {
        run_best = c;
        have = true;
      }
      // multiplier and penalty updates
      double dlam = 0;
      for (std::size_t k = 1; k <= Nt; ++k) {
        if (prob.constraints.hc) {
          const double nl = std::max(0.0, lam.hc[k] - mu * cv.hc[k]);
          dlam = std::max(dlam, std::abs(nl - lam.hc[k]));
          lam.hc[k] = nl;
        }
        if (prob.constraints.h) {
          const double nl = std::max(0.0, lam.h[k] - mu * cv.h[k]);
          dlam = std::max(dlam, std::abs(nl - lam.h[k]));
          lam.h[k] = nl;
        }
      }
      if (prob.constraints.u1_budget) {
        const double nl = std::max(0.0, lam.budget - mu * cv.budget);
        dlam = std::max(dlam, std::abs(nl - lam.budget));
        lam.budget = nl;
      }
      if (cv.max_violation > cfg.feas_tol && cv.max_violation > 0.25 * prev_viol)
        mu = std::min(mu * cfg.penalty_growth, cfg.penalty_max);
      prev_viol = cv.max_violation;
      if (feasible && (res.converged || stalled) && dlam < 1e-6 * std::max(1.0, mu)) break;
    }
    run_best.lam = lam;
    summary.push_back({{"start", name},
                       {"rho_C_final", run_best.rho_C},
                       {"max_violation", run_best.violation},
                       {"outer_iterations", std::min(outer + 1, cfg.max_outer)}});
    if (run_best.violation <= cfg.feas_tol) {
      if (!best_feasible || run_best.rho_C < best_feasible->rho_C) best_feasible = run_best;
    } else if (!least_infeasible || run_best.violation < least_infeasible->violation) {
      least_infeasible = run_best;
    }
  }

  auto finish = [&](const Candidate& c) {
    OcpSolution s;
    std::vector<double> g;
    Multipliers lam = c.lam;
    // Lagrangian gradient for the KKT residual
    al(c.x, g, lam, 1.0, true);
    double st = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = std::clamp(c.x[i] - g[i], 0.0, 1.0);
      st = std::max(st, std::abs(y - c.x[i]));
    }
    const auto& tp = al.tape();
    const auto cv = constraints_of(prob, tp, al.u1());
    double comp = 0;
    for (std::size_t k = 1; k <= Nt; ++k) {
      if (prob.constraints.hc) comp = std::max(comp, std::abs(lam.hc[k] * cv.hc[k]));
      if (prob.constraints.h) comp = std::max(comp, std::abs(lam.h[k] * cv.h[k]));
    }
    s.u1 = al.u1();
    s.u2 = al.u2();
    for (std::size_t k = 0; k <= Nt; ++k) s.t.push_back(prob.time(k));
    s.u_opt = ControlSchedule::uniform(s.u1, s.u2, prob.T);
    s.rho_H = tp.rH;
    s.rho_C = tp.rC;
    for (std::size_t k = 0; k <= Nt; ++k) {
      s.g1.push_back(tp.rH[k] / (tp.rH[k] + tp.rC[k]));
      s.g2.push_back(tp.rH[k] / prob.rho_H0);
    }
    s.lambda_HC = lam.hc;
    s.lambda_H = lam.h;
    s.rho_C_final = tp.rC[Nt];
    s.max_violation = cv.max_violation;
    s.kkt_stationarity = st;
    s.kkt_complementarity = comp;
    if (prob.constraints.hc) {
      auto a = activity_of(prob, cv.hc, "HC", cfg.activity_tol);
      s.activity.insert(s.activity.end(), a.begin(), a.end());
    }
    if (prob.constraints.h) {
      auto a = activity_of(prob, cv.h, "H", cfg.activity_tol);
      s.activity.insert(s.activity.end(), a.begin(), a.end());
    }
    s.start = c.start;
    s.outer_iterations = c.outer;
    s.starts_summary = summary;
    return s;
  };

  if (!best_feasible) {
    std::ostringstream os;
    os << "no feasible point found; least violation " << least_infeasible->violation;
    throw OcpInfeasibleError(os.str(), finish(*least_infeasible));
  }
  return finish(*best_feasible);
}

nlohmann::json MonotonicityScan::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& row : rows)
    r.push_back({{"T", row.T}, {"Nt", row.Nt}, {"rho_C", row.rho_C}, {"max_violation", row.max_violation}});
  return {{"rows", r}, {"violations", violations}, {"monotone", monotone()}};
}

MonotonicityScan monotonicity_scan(const ModelParams& p, const std::vector<double>& T_list, const OptimizerConfig& cfg,
                                   double steps_per_unit, std::size_t Nx, double rel_tol) {
  for (std::size_t i = 1; i < T_list.size(); ++i)
    if (!(T_list[i] > T_list[i - 1])) throw DomainError("T_list must be increasing");
  MonotonicityScan out;
  std::optional<OcpSolution> prev;
  double prevT = 0;
  for (double T : T_list) {
    const std::size_t Nt = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(T * steps_per_unit)));
    const auto pr = transcribe(p, T, Nt, Nx);
    OptimizerConfig c = cfg;
    if (prev) {
      // previous optimum placed at the end of the new horizon, holiday before it
      std::vector<double> a(Nt), b(Nt);
      for (std::size_t k = 0; k < Nt; ++k) {
        const double tm = 0.5 * (pr.time(k) + pr.time(k + 1)) - (T - prevT);
        const DosePair u = tm < 0 ? cfg.holiday : prev->u_opt.at(tm);
        a[k] = u.u1;
        b[k] = u.u2;
      }
      c.warm_starts.emplace_back(a, b);
    }
    const auto sol = solve_ocp(pr, c);
    out.rows.push_back({T, Nt, sol.rho_C_final, sol.max_violation});
    if (out.rows.size() > 1 && sol.rho_C_final > out.rows[out.rows.size() - 2].rho_C * (1 + rel_tol))
      out.violations.push_back(out.rows.size() - 1);
    prev = sol;
    prevT = T;
  }
  return out;
}

ToyC2Direct toy_c2_direct(double r, double d, double mu, double rho0, double T, double budget, double u_inf_max,
                          std::size_t Nt) {
  ModelParams p;
  p.r_H = RateFn::constant(r);
  p.r_C = RateFn::constant(r);
  p.d_H = RateFn::constant(d);
  p.d_C = RateFn::constant(d);
  p.mu_H = RateFn::constant(mu);
  p.mu_C = RateFn::constant(mu);
  p.alpha_H = 0;
  p.alpha_C = 0;
  p.a_HH = 1;
  p.a_CC = 1;
  p.a_HC = 0;
  p.a_CH = 0;
  p.u1_max = u_inf_max;
  p.u2_max = 0;
  auto g = make_grid(5);
  PathConstraints pc{false, false, budget};
  const auto pr = transcribe(p, constant_density(g, rho0), constant_density(g, rho0), T, Nt, 5, pc);
  OptimizerConfig cfg;
  cfg.starts = {"zero"};
  cfg.feas_tol = 1e-8;
  cfg.max_outer = 40;
  cfg.kkt_tol = 1e-10;
  const auto sol = solve_ocp(pr, cfg);
  ToyC2Direct out;
  out.T1 = T - budget / u_inf_max;
  out.dt = T / Nt;
  out.u1 = sol.u1;
  out.value = sol.rho_C_final;
  out.switch_time = T;
  for (std::size_t k = 0; k < Nt; ++k)
    if (sol.u1[k] > 0.5 * u_inf_max) {
      out.switch_time = pr.time(k);
      break;
    }
  return out;
}

}  // namespace pheno
