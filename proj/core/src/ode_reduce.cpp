#include "pheno/ode_reduce.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pheno/errors.hpp"

namespace pheno {

AtomModel AtomModel::at(const ModelParams& p, double xH, double xC) {
  AtomModel a;
  a.x_H = xH;
  a.x_C = xC;
  a.r_H = p.r_H(xH);
  a.d_H = p.d_H(xH);
  a.mu_H = p.mu_H(xH);
  a.r_C = p.r_C(xC);
  a.d_C = p.d_C(xC);
  a.mu_C = p.mu_C(xC);
  a.alpha_H = p.alpha_H;
  a.alpha_C = p.alpha_C;
  a.a_HH = p.a_HH;
  a.a_HC = p.a_HC;
  a.a_CH = p.a_CH;
  a.a_CC = p.a_CC;
  a.u1_max = p.u1_max;
  a.u2_max = p.u2_max;
  a.theta_HC = p.theta_HC;
  a.theta_H = p.theta_H;
  return a;
}

double AtomModel::R_H(double rH, double rC, const DosePair& u) const {
  return r_H / (1 + alpha_H * u.u2) - d_H * (a_HH * rH + a_HC * rC) - u.u1 * mu_H;
}

double AtomModel::R_C(double rH, double rC, const DosePair& u) const {
  return r_C / (1 + alpha_C * u.u2) - d_C * (a_CH * rH + a_CC * rC) - u.u1 * mu_C;
}

OdeState rk4_step(const AtomModel& a, const OdeState& s, const DosePair& u, double dt) {
  auto f = [&](double h, double c) { return std::pair{a.R_H(h, c, u) * h, a.R_C(h, c, u) * c}; };
  const auto [k1h, k1c] = f(s.rho_H, s.rho_C);
  const auto [k2h, k2c] = f(s.rho_H + 0.5 * dt * k1h, s.rho_C + 0.5 * dt * k1c);
  const auto [k3h, k3c] = f(s.rho_H + 0.5 * dt * k2h, s.rho_C + 0.5 * dt * k2c);
  const auto [k4h, k4c] = f(s.rho_H + dt * k3h, s.rho_C + dt * k3c);
  return {s.rho_H + dt / 6 * (k1h + 2 * k2h + 2 * k3h + k4h), s.rho_C + dt / 6 * (k1c + 2 * k2c + 2 * k3c + k4c)};
}

namespace {

void push(OdeTrajectory& tr, double t, const OdeState& s, const DosePair& u, int mode) {
  tr.t.push_back(t);
  tr.rho_H.push_back(s.rho_H);
  tr.rho_C.push_back(s.rho_C);
  tr.u1.push_back(u.u1);
  tr.u2.push_back(u.u2);
  tr.mode.push_back(mode);
}

void check(const OdeState& s, double t) {
  if (!std::isfinite(s.rho_H) || !std::isfinite(s.rho_C)) {
    std::ostringstream os;
    os << "nonfinite ODE state at t=" << t;
    throw NumericalError(os.str(), t, std::numeric_limits<double>::quiet_NaN());
  }
}

}  // namespace

OdeTrajectory simulate_ode(const AtomModel& a, const OdeState& init, const ControlSchedule& sch, double T, double dt,
                           double t0) {
  if (init.rho_H < 0 || init.rho_C < 0) throw DomainError("negative initial ODE state");
  const std::size_t n = step_count(T, dt);
  OdeTrajectory tr;
  OdeState s = init;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = step_time(t0, T, n, k), t1 = step_time(t0, T, n, k + 1);
    const DosePair u0 = sch.at(t);
    push(tr, t, s, u0, 0);
    double a0 = t;
    const auto& br = sch.breaks();
    for (auto it = std::upper_bound(br.begin(), br.end(), t); it != br.end() && *it < t1 - 1e-14; ++it) {
      s = rk4_step(a, s, sch.at(0.5 * (a0 + *it)), *it - a0);
      a0 = *it;
    }
    s = rk4_step(a, s, a0 == t ? u0 : sch.at(0.5 * (a0 + t1)), t1 - a0);
    check(s, t1);
  }
  push(tr, step_time(t0, T, n, n), s, sch.at(step_time(t0, T, n, n)), 0);
  return tr;
}

OdeTrajectory simulate_ode(const AtomModel& a, const OdeState& init, const OdeDoseRule& rule, double T, double dt,
                           double t0, int mode) {
  if (init.rho_H < 0 || init.rho_C < 0) throw DomainError("negative initial ODE state");
  const std::size_t n = step_count(T, dt);
  OdeTrajectory tr;
  OdeState s = init;
  DosePair u{};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = step_time(t0, T, n, k), t1 = step_time(t0, T, n, k + 1);
    u = rule(t, s, mode);
    u.u1 = std::clamp(u.u1, 0.0, a.u1_max);
    u.u2 = std::clamp(u.u2, 0.0, a.u2_max);
    push(tr, t, s, u, mode);
    s = rk4_step(a, s, u, t1 - t);
    check(s, t1);
  }
  push(tr, step_time(t0, T, n, n), s, u, mode);
  return tr;
}

OdeTrajectory simulate_ode(const ModelParams& p, double x_H, double x_C, const OdeState& init,
                           const ControlSchedule& schedule, double T, double dt) {
  schedule.validate(p);
  return simulate_ode(AtomModel::at(p, x_H, x_C), init, schedule, T, dt);
}

ReductionGap reduction_gap_from(const ModelParams& p, const Density& n_H, const Density& n_C, double x_H, double x_C,
                                const ControlSchedule& phase2, double T2, const GapOptions& opt) {
  ReductionGap g;
  g.x_H = x_H;
  g.x_C = x_C;
  if (T2 <= 0.0) return g;
  SimOptions so;
  so.dt = opt.dt;
  so.n_snapshots = 0;
  so.corrector = opt.corrector;
  const Trajectory ide = simulate(p, n_H, n_C, phase2, T2, so);
  const OdeTrajectory ode = simulate_ode(AtomModel::at(p, x_H, x_C), {ide.rho_H.front(), ide.rho_C.front()}, phase2,
                                         T2, opt.ode_dt);
  // compare on the IDE time grid, interpolating the ODE linearly
  std::size_t j = 0;
  for (std::size_t k = 0; k < ide.size(); ++k) {
    const double t = ide.t[k];
    while (j + 1 < ode.size() && ode.t[j + 1] < t) ++j;
    double h = ode.rho_H[j], c = ode.rho_C[j];
    if (j + 1 < ode.size()) {
      const double w = (t - ode.t[j]) / (ode.t[j + 1] - ode.t[j]);
      h += w * (ode.rho_H[j + 1] - ode.rho_H[j]);
      c += w * (ode.rho_C[j + 1] - ode.rho_C[j]);
    }
    const double gh = std::abs(ide.rho_H[k] - h), gc = std::abs(ide.rho_C[k] - c);
    g.t.push_back(t);
    g.gap_H.push_back(gh);
    g.gap_C.push_back(gc);
    g.sup_gap = std::max({g.sup_gap, gh, gc});
  }
  return g;
}

ReductionGap reduction_gap(const ModelParams& p, const DosePair& u_bar, double T1, const ControlSchedule& phase2,
                           double T2, const GapOptions& opt) {
  const auto eq = equilibrium(p, u_bar);
  auto grid = make_grid(opt.nx);
  SimOptions so;
  so.dt = opt.dt;
  so.n_snapshots = 0;
  so.corrector = opt.corrector;
  const Trajectory burn = simulate(p, gaussian_init(grid, 0.5, 0.1, 2.7), gaussian_init(grid, 0.5, 0.1, 0.5),
                                   ControlSchedule::constant(u_bar, T1), T1, so);
  ReductionGap g = reduction_gap_from(p, burn.final_H, burn.final_C, eq.x_H_inf, eq.x_C_inf, phase2, T2, opt);
  for (auto& t : g.t) t += T1;
  return g;
}

CurabilityReport check_decreasing(const ModelParams& p, const DosePair& u_bar, double horizon, double dt) {
  CurabilityReport r;
  const auto eq = equilibrium(p, u_bar);
  const AtomModel a = AtomModel::at(p, eq.x_H_inf, eq.x_C_inf);
  const DosePair mtd = p.mtd();
  auto signs = [&](double h, double c, double& dh, double& dc, double& dr) {
    dh = a.R_H(h, c, mtd) * h;
    dc = a.R_C(h, c, mtd) * c;
    dr = h > 0 ? (c / h) * (a.R_C(h, c, mtd) - a.R_H(h, c, mtd)) : std::numeric_limits<double>::quiet_NaN();
  };
  signs(eq.rho_H_inf, eq.rho_C_inf, r.drho_H, r.drho_C, r.dratio);
  r.ratio_defined = eq.rho_H_inf > 0;
  r.rho_H_decreasing = r.drho_H < 0;
  r.rho_C_decreasing = r.drho_C < 0;
  r.ratio_decreasing = r.ratio_defined && r.dratio < 0;
  if (!(r.rho_H_decreasing && r.rho_C_decreasing && r.ratio_decreasing)) {
    r.first_failure = 0.0;
    return r;
  }
  const auto tr = simulate_ode(a, {eq.rho_H_inf, eq.rho_C_inf}, ControlSchedule::constant(mtd, horizon), horizon, dt);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    double dh, dc, dr;
    signs(tr.rho_H[k], tr.rho_C[k], dh, dc, dr);
    if (!(dh < 0 && dc < 0 && dr < 0)) {
      r.first_failure = tr.t[k];
      break;
    }
  }
  return r;
}

}  // namespace pheno
