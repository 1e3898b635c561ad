#include "pheno/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pheno/errors.hpp"
#include "pheno/numerics.hpp"

namespace pheno {

ControlSchedule constant_schedule(const DosePair& u, double T) { return ControlSchedule::constant(u, T); }

ControlSchedule mtd_schedule(const ModelParams& p, double T) { return ControlSchedule::constant(p.mtd(), T); }

namespace {

BoundaryControl finish(double raw, double umax, bool singular) {
  BoundaryControl b;
  b.singular = singular;
  if (singular) return b;
  b.raw = raw;
  b.admissible = raw > 0 && raw < umax;
  b.u1 = std::clamp(raw, 0.0, umax);
  b.clipped = b.u1 != raw;
  return b;
}

}  // namespace

BoundaryControl boundary_u1_on_H(const AtomModel& a, double rho_H0, double v, double rho_C) {
  if (!(a.mu_H > 0)) return finish(0, a.u1_max, true);
  const double raw = (a.r_H / (1 + a.alpha_H * v) - a.d_H * (a.a_HH * a.theta_H * rho_H0 + a.a_HC * rho_C)) / a.mu_H;
  return finish(raw, a.u1_max, false);
}

BoundaryControl boundary_u1_on_H(const ModelParams& p, const EquilibriumReport& eq, double rho_H0, double v,
                                 double rho_C) {
  return boundary_u1_on_H(AtomModel::at(p, eq.x_H_inf, eq.x_C_inf), rho_H0, v, rho_C);
}

BoundaryControl boundary_u1_on_HC(const AtomModel& a, double u2, double rho_H) {
  const double dmu = a.mu_H - a.mu_C;
  if (std::abs(dmu) < 1e-14) return finish(0, a.u1_max, true);
  const double g = a.gamma();
  const double lhs = a.r_H / (1 + a.alpha_H * u2) - a.d_H * rho_H * (a.a_HH + g * a.a_HC);
  const double rhs = a.r_C / (1 + a.alpha_C * u2) - a.d_C * rho_H * (g * a.a_CC + a.a_CH);
  return finish((lhs - rhs) / dmu, a.u1_max, false);
}

BoundaryControl boundary_u1_on_HC(const ModelParams& p, const EquilibriumReport& eq, double u2, double rho_H) {
  return boundary_u1_on_HC(AtomModel::at(p, eq.x_H_inf, eq.x_C_inf), u2, rho_H);
}

BoundaryControl density_u1_on_H(const SampledModel& m, const std::vector<double>& nH, const std::vector<double>& nC,
                                double v) {
  const auto& g = *m.grid;
  const auto& p = m.params;
  const double rH = g.integrate(nH), rC = g.integrate(nC);
  const double I = p.a_HH * rH + p.a_HC * rC;
  const double mu = g.integrate(m.mu_H, nH);
  if (!(mu > 0)) return finish(0, p.u1_max, true);
  const double raw = (g.integrate(m.r_H, nH) / (1 + p.alpha_H * v) - I * g.integrate(m.d_H, nH)) / mu;
  return finish(raw, p.u1_max, false);
}

BoundaryControl density_u1_on_HC(const SampledModel& m, const std::vector<double>& nH, const std::vector<double>& nC,
                                 double u2) {
  const auto& g = *m.grid;
  const auto& p = m.params;
  const double rH = g.integrate(nH), rC = g.integrate(nC);
  if (!(rH > 0 && rC > 0)) return finish(0, p.u1_max, true);
  const double IH = p.a_HH * rH + p.a_HC * rC, IC = p.a_CH * rH + p.a_CC * rC;
  const double muH = g.integrate(m.mu_H, nH) / rH, muC = g.integrate(m.mu_C, nC) / rC;
  if (std::abs(muH - muC) < 1e-14) return finish(0, p.u1_max, true);
  const double aH = g.integrate(m.r_H, nH) / rH / (1 + p.alpha_H * u2) - IH * g.integrate(m.d_H, nH) / rH;
  const double aC = g.integrate(m.r_C, nC) / rC / (1 + p.alpha_C * u2) - IC * g.integrate(m.d_C, nC) / rC;
  return finish((aH - aC) / (muH - muC), p.u1_max, false);
}

const char* arc_name(ArcKind k) {
  switch (k) {
    case ArcKind::phase1: return "phase1";
    case ArcKind::holiday: return "holiday";
    case ArcKind::hc_boundary: return "hc-boundary";
    case ArcKind::mtd: return "mtd";
    case ArcKind::h_boundary: return "h-boundary";
  }
  return "?";
}

nlohmann::json TwoPhasePlan::arcs_json() const {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& arc : arcs) a.push_back({{"kind", arc_name(arc.kind)}, {"t_start", arc.t_start}, {"t_end", arc.t_end}});
  nlohmann::json scan = nlohmann::json::array();
  for (const auto& [t2, rc] : split_scan) scan.push_back({t2, rc});
  return {{"u_bar", {u_bar.u1, u_bar.u2}}, {"T", T},   {"T1", T1},
          {"T2", T2},                       {"T2_max", T2_max},
          {"guaranteed", guaranteed},       {"rho_C_final", final_rho_C()},
          {"arcs", a},                      {"split_scan", scan}};
}

std::pair<Density, Density> paper_initial(GridPtr grid) {
  return {gaussian_init(grid, 0.5, 0.1, 2.7), gaussian_init(grid, 0.5, 0.1, 0.5)};
}

Policy second_phase_policy(const ModelParams& p, double t_start, const TwoPhaseOptions& opt, bool with_hc_arc) {
  Policy pol;
  pol.name = "second-phase";
  pol.hysteresis = opt.hysteresis;
  pol.mode_names = {"phase1", "hc-boundary", "mtd", "h-boundary"};
  pol.initial_mode = with_hc_arc && opt.tau1 > 0 ? 1 : 2;
  const double h = opt.hysteresis, tau1 = opt.tau1;
  const DosePair mtd = p.mtd();
  pol.rule = [=](const PolicyObservation& o) {
    int mode = o.mode;
    if (mode == 1 && o.t - t_start >= tau1) mode = 2;
    if (mode == 2 && o.rho_H <= p.theta_H * o.rho_H0 * (1 + h)) mode = 3;
    if (mode == 1) {
      const auto b = density_u1_on_HC(*o.model, *o.n_H, *o.n_C, p.u2_max);
      return PolicyDecision{{b.singular ? 0.0 : b.u1, p.u2_max}, mode};
    }
    if (mode == 3) {
      const auto b = density_u1_on_H(*o.model, *o.n_H, *o.n_C, p.u2_max);
      return PolicyDecision{{b.singular ? 0.0 : b.u1, p.u2_max}, mode};
    }
    return PolicyDecision{mtd, mode};
  };
  return pol;
}

std::vector<Arc> extract_arcs(const Trajectory& tr, const std::vector<ArcKind>& kinds) {
  std::vector<Arc> arcs;
  if (tr.size() == 0) return arcs;
  auto kind = [&](int m) { return m >= 0 && static_cast<std::size_t>(m) < kinds.size() ? kinds[m] : ArcKind::phase1; };
  // the last entry carries no dose; arcs are read from applied modes
  const std::size_t n = tr.size() > 1 ? tr.size() - 1 : 1;
  Arc cur{kind(tr.mode[0]), tr.t[0], tr.t[0]};
  for (std::size_t k = 1; k < n; ++k) {
    if (tr.mode[k] != tr.mode[k - 1]) {
      cur.t_end = tr.t[k];
      arcs.push_back(cur);
      cur = {kind(tr.mode[k]), tr.t[k], tr.t[k]};
    }
  }
  cur.t_end = tr.t.back();
  arcs.push_back(cur);
  return arcs;
}

std::vector<double> cycle_minima(const Trajectory& tr, int holiday_mode) {
  std::vector<double> out;
  bool in_cycle = false;
  double mn = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
    const bool treat = tr.mode[k] != holiday_mode;
    if (treat) {
      in_cycle = true;
      mn = std::min(mn, std::min(tr.rho_C[k], tr.rho_C[k + 1]));
    } else if (in_cycle) {
      out.push_back(mn);
      in_cycle = false;
      mn = std::numeric_limits<double>::infinity();
    }
  }
  return out;
}

namespace {

SimOptions sim_opts(const StrategyOptions& o, int snaps) {
  SimOptions so;
  so.dt = o.dt;
  so.corrector = o.corrector;
  so.n_snapshots = snaps;
  return so;
}

Trajectory run_phase2(const ModelParams& p, const Density& nH, const Density& nC, double t_start, double T2,
                      double rho_H0, const TwoPhaseOptions& opt, int snaps) {
  const double g1 = total_mass(nH) / (total_mass(nH) + total_mass(nC));
  const bool hc = std::abs(g1 - p.theta_HC) <= opt.hc_tol;
  SimOptions so = sim_opts(opt, snaps);
  so.t0 = t_start;
  so.rho_H0 = rho_H0;
  return simulate_closed_loop(p, nH, nC, second_phase_policy(p, t_start, opt, hc), T2, so);
}

}  // namespace

TwoPhasePlan two_phase_plan(const ModelParams& p, const Density& nH0, const Density& nC0, const DosePair& u_bar,
                            double T, double T2_max, const TwoPhaseOptions& opt) {
  check_dose(p, u_bar);
  if (!(T > 0) || !(T2_max >= 0) || !(T > T2_max)) throw DomainError("two-phase plan needs T > T2_max >= 0");
  TwoPhasePlan plan;
  plan.u_bar = u_bar;
  plan.T = T;
  plan.T2_max = T2_max;
  plan.guaranteed = check_decreasing(p, u_bar).ok();
  const double rho_H0 = total_mass(nH0);
  const std::vector<ArcKind> kinds{ArcKind::phase1, ArcKind::hc_boundary, ArcKind::mtd, ArcKind::h_boundary};

  if (T2_max == 0.0) {
    plan.T1 = T;
    plan.traj = simulate(p, nH0, nC0, ControlSchedule::constant(u_bar, T), T, sim_opts(opt, opt.n_snapshots));
    plan.arcs = {{ArcKind::phase1, 0.0, T}};
    return plan;
  }

  double best_T2 = T2_max;
  if (opt.optimise_split && opt.split_candidates > 1) {
    const int nc = opt.split_candidates;
    Density h = nH0, c = nC0;
    double t = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = nc; j >= 1; --j) {
      const double T2 = T2_max * j / nc;
      const double start = T - T2;
      if (start > t) {
        SimOptions so = sim_opts(opt, 0);
        so.t0 = t;
        so.rho_H0 = rho_H0;
        const Trajectory seg = simulate(p, h, c, ControlSchedule({t, start}, {u_bar}), start - t, so);
        h = seg.final_H;
        c = seg.final_C;
        t = start;
      }
      const Trajectory ph2 = run_phase2(p, h, c, start, T2, rho_H0, opt, 0);
      plan.split_scan.emplace_back(T2, ph2.rho_C.back());
      if (ph2.rho_C.back() < best) {
        best = ph2.rho_C.back();
        best_T2 = T2;
      }
    }
    std::reverse(plan.split_scan.begin(), plan.split_scan.end());
  }

  plan.T2 = best_T2;
  plan.T1 = T - best_T2;
  SimOptions so = sim_opts(opt, opt.n_snapshots);
  plan.traj = simulate(p, nH0, nC0, ControlSchedule::constant(u_bar, plan.T1), plan.T1, so);
  plan.traj.mode_names = {"phase1", "hc-boundary", "mtd", "h-boundary"};
  const Trajectory ph2 = run_phase2(p, plan.traj.final_H, plan.traj.final_C, plan.T1, plan.T2, rho_H0, opt,
                                    opt.n_snapshots);
  plan.traj.extend(ph2);
  plan.traj.mode_names = {"phase1", "hc-boundary", "mtd", "h-boundary"};
  plan.arcs = extract_arcs(plan.traj, kinds);
  return plan;
}

TwoPhasePlan two_phase_plan(const ModelParams& p, const DosePair& u_bar, double T, double T2_max,
                            const TwoPhaseOptions& opt) {
  auto [h, c] = paper_initial(make_grid(opt.nx));
  return two_phase_plan(p, h, c, u_bar, T, T2_max, opt);
}

Policy quasi_periodic_policy_1(const ModelParams& p, const DosePair& holiday, double h) {
  check_dose(p, holiday);
  Policy pol;
  pol.name = "qp1";
  pol.hysteresis = h;
  pol.mode_names = {"holiday", "mtd"};
  const DosePair mtd = p.mtd();
  pol.rule = [=](const PolicyObservation& o) {
    int mode = o.mode;
    const double g1 = o.rho_H / (o.rho_H + o.rho_C);
    if (mode == 0 && g1 <= p.theta_HC * (1 + h)) mode = 1;
    else if (mode == 1 && o.rho_H <= p.theta_H * o.rho_H0 * (1 + h)) mode = 0;
    return PolicyDecision{mode == 0 ? holiday : mtd, mode};
  };
  return pol;
}

Policy quasi_periodic_policy_2(const ModelParams& p, const DosePair& holiday, double h) {
  check_dose(p, holiday);
  Policy pol;
  pol.name = "qp2";
  pol.hysteresis = h;
  pol.mode_names = {"holiday", "mtd", "h-boundary"};
  const DosePair mtd = p.mtd();
  pol.rule = [=](const PolicyObservation& o) {
    int mode = o.mode;
    const double g1 = o.rho_H / (o.rho_H + o.rho_C);
    if (mode == 0 && g1 <= p.theta_HC * (1 + h)) {
      mode = 1;
    } else if (mode == 1 && o.rho_H <= p.theta_H * o.rho_H0 * (1 + h)) {
      mode = 2;
    } else if (mode == 2 && !std::isnan(o.rho_C_prev) && o.rho_C >= o.rho_C_prev) {
      mode = 0;
    }
    if (mode == 2) {
      const auto b = density_u1_on_H(*o.model, *o.n_H, *o.n_C, p.u2_max);
      return PolicyDecision{{b.singular ? 0.0 : b.u1, p.u2_max}, mode};
    }
    return PolicyDecision{mode == 0 ? holiday : mtd, mode};
  };
  return pol;
}

Policy mtd_policy(const ModelParams& p, double h) {
  Policy pol;
  pol.name = "mtd";
  pol.hysteresis = h;
  pol.mode_names = {"mtd", "h-boundary"};
  const DosePair mtd = p.mtd();
  pol.rule = [=](const PolicyObservation& o) {
    int mode = o.mode;
    if (mode == 0 && o.rho_H <= p.theta_H * o.rho_H0 * (1 + h)) mode = 1;
    if (mode == 1) {
      const auto b = density_u1_on_H(*o.model, *o.n_H, *o.n_C, p.u2_max);
      return PolicyDecision{{b.singular ? 0.0 : b.u1, p.u2_max}, mode};
    }
    return PolicyDecision{mtd, mode};
  };
  return pol;
}

}  // namespace pheno
