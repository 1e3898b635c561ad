#include "pheno/pmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pheno/errors.hpp"
#include "pheno/numerics.hpp"

namespace pheno {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

HypothesisCheck make_check(std::string id, std::vector<double> v, bool pass, std::string note = {}) {
  HypothesisCheck c;
  c.id = std::move(id);
  c.values = std::move(v);
  c.pass = pass;
  c.note = std::move(note);
  return c;
}

HypothesisCheck inapplicable(std::string id, std::vector<double> v, std::string note) {
  HypothesisCheck c = make_check(std::move(id), std::move(v), false, std::move(note));
  c.applicable = false;
  return c;
}

}  // namespace

bool HypothesisReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.applicable && c.pass; });
}

const HypothesisCheck* HypothesisReport::find(const std::string& id) const {
  for (const auto& c : checks)
    if (c.id == id) return &c;
  return nullptr;
}

nlohmann::json HypothesisReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json j{{"id", c.id}, {"values", c.values}, {"applicable", c.applicable}, {"pass", c.pass}};
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
  }
  return {{"u_bar", {u_bar.u1, u_bar.u2}}, {"x_H", x_H}, {"x_C", x_C}, {"rho_H0", rho_H0}, {"gamma", gamma},
          {"r_d", r_d},                    {"d_b", d_b}, {"ok", ok()},   {"checks", arr}};
}

HypothesisReport check_hypotheses(const ModelParams& p, const DosePair& u_bar, std::optional<double> rho_H0) {
  check_dose(p, u_bar);
  HypothesisReport rep;
  rep.u_bar = u_bar;
  const auto eq = equilibrium(p, u_bar);
  rep.x_H = eq.x_H_inf;
  rep.x_C = eq.x_C_inf;
  rep.rho_H0 = rho_H0.value_or(eq.rho_H_inf);
  rep.gamma = p.gamma();
  const AtomModel a = AtomModel::at(p, eq.x_H_inf, eq.x_C_inf);
  const double g = rep.gamma, L = p.theta_H * rep.rho_H0;

  rep.checks.push_back(make_check("sensitivity_order", {p.alpha_H, p.alpha_C}, p.alpha_H < p.alpha_C, "alpha_H < alpha_C"));
  if (!rep.checks.back().pass) return rep;

  {
    bool single = eq.singleton_H && eq.singleton_C;
    int bad = 0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const auto e = equilibrium(p, {p.u1_max * i / 4.0, p.u2_max * j / 4.0});
        if (!(e.singleton_H && e.singleton_C)) ++bad;
      }
    rep.checks.push_back(make_check("single_dirac", {double(eq.A_H.size()), double(eq.A_C.size()), double(bad)},
                                    single && bad == 0, "argmax sets singletons at u_bar and on a 5x5 dose grid"));
  }
  {
    const auto cr = check_decreasing(p, u_bar);
    rep.checks.push_back(make_check("curability", {cr.drho_H, cr.drho_C, cr.dratio}, cr.ok(),
                                    cr.first_failure ? "fails along the MTD trajectory" : ""));
  }

  const double mH = a.mu_H, mC = a.mu_C;
  rep.checks.push_back(make_check("positive_kill", {mH, mC}, mH > 0 && mC > 0));

  {
    const double pre1 = mC * a.a_HH * a.d_H - mH * a.a_CH * a.d_C;
    const double pre2 = a.a_CC * mH * a.d_C - a.a_HC * mC * a.d_H;
    if (!(mC > 0)) {
      rep.checks.push_back(inapplicable("gamma_bound", {g}, "mu_C = 0"));
    } else if (!(pre1 > 0 && pre2 > 0)) {
      rep.checks.push_back(inapplicable("gamma_bound", {g, pre1, pre2}, "sign preconditions fail"));
    } else {
      const double rhs = (mH / mC) * pre1 / pre2;
      rep.checks.push_back(make_check("gamma_bound", {g, rhs}, g < rhs));
    }
  }
  {
    const double l1 = p.alpha_H * mC * a.r_H, r1 = p.alpha_C * mH * a.r_C;
    const double l2 = p.alpha_H * mH * a.r_C, r2 = p.alpha_C * mC * a.r_H;
    rep.checks.push_back(make_check("cytostatic_order", {l1, r1, l2, r2}, l1 < r1 && l2 < r2));
  }
  {
    const double u = p.u2_max;
    const double q = (p.alpha_C * a.r_H * mC - p.alpha_H * a.r_C * mH) * u * u + 2 * (a.r_H * mC - a.r_C * mH) * u +
                     (p.alpha_H * a.r_H * mC - p.alpha_C * a.r_C * mH) / (p.alpha_H * p.alpha_C);
    rep.checks.push_back(make_check("cytostatic_quadratic", {q}, q < 0));
  }
  {
    std::vector<double> v;
    bool pass = mH > 0;
    if (pass) {
      for (double u2 : {0.0, p.u2_max})
        for (double rc : {0.0, g * L}) {
          const auto b = boundary_u1_on_H(a, rep.rho_H0, u2, rc);
          v.push_back(b.raw);
          pass = pass && b.admissible;
        }
      rep.checks.push_back(make_check("h_feedback_admissible", v, pass, "u1 feedback at v in {0,u2_max}, rho_C in {0, gamma theta_H rho_H0}"));
    } else {
      rep.checks.push_back(inapplicable("h_feedback_admissible", {}, "mu_H = 0"));
    }
  }
  rep.r_d = (a.r_C * mH - a.r_H * mC) + (a.a_HH * a.d_H * mC - mH * a.a_CH * a.d_C) * L;
  rep.d_b = a.a_CC * mH * a.d_C - a.a_HC * mC * a.d_H;
  rep.checks.push_back(make_check("r_d", {rep.r_d}, rep.r_d > 0));
  rep.checks.push_back(make_check("d_b", {rep.d_b}, rep.d_b > 0));
  if (rep.d_b > 0)
    rep.checks.push_back(make_check("h_level_bound", {g * L, rep.r_d / rep.d_b}, g * L < rep.r_d / rep.d_b));
  else
    rep.checks.push_back(inapplicable("h_level_bound", {g * L}, "d_b <= 0"));
  return rep;
}

double hamiltonian(const AtomModel& a, const OdeState& s, const AdjointState& adj, const DosePair& u,
                   const ConstraintLevels& c) {
  return adj.p_H * a.R_H(s.rho_H, s.rho_C, u) * s.rho_H + adj.p_C * a.R_C(s.rho_H, s.rho_C, u) * s.rho_C +
         adj.eta_1 * (c.theta_H_rho_H0 - s.rho_H) + adj.eta_2 * (s.rho_C - c.gamma * s.rho_H);
}

std::array<double, 2> adjoint_rhs(const AtomModel& a, const OdeState& s, const AdjointState& adj, const DosePair& u,
                                  const ConstraintLevels& c) {
  const double RH = a.R_H(s.rho_H, s.rho_C, u), RC = a.R_C(s.rho_H, s.rho_C, u);
  return {-adj.p_H * (-a.a_HH * a.d_H * s.rho_H + RH) + a.a_CH * a.d_C * adj.p_C * s.rho_C + adj.eta_1 +
              c.gamma * adj.eta_2,
          -adj.p_C * (-a.a_CC * a.d_C * s.rho_C + RC) + a.a_HC * a.d_H * adj.p_H * s.rho_H - adj.eta_2};
}

double psi(const AtomModel& a, const OdeState& s, const AdjointState& adj, double u2) {
  return a.r_H * adj.p_H * s.rho_H / (1 + a.alpha_H * u2) + a.r_C * adj.p_C * s.rho_C / (1 + a.alpha_C * u2);
}

SwitchingResult switching_controls(const AtomModel& a, const OdeState& s, const AdjointState& adj,
                                   double singular_tol) {
  SwitchingResult r;
  const double A = adj.p_H * s.rho_H, B = adj.p_C * s.rho_C;
  r.phi_1 = a.mu_H * A + a.mu_C * B;
  const double scale = std::max({std::abs(a.mu_H * A), std::abs(a.mu_C * B), 1e-300});
  if (std::abs(r.phi_1) < singular_tol * scale) {
    r.singular = true;
    r.u1_star = 0;
  } else {
    r.u1_star = r.phi_1 < 0 ? a.u1_max : 0.0;
  }
  const double aH = a.alpha_H, aC = a.alpha_C;
  r.P = {aH * aC * (aC * a.r_H * A + aH * a.r_C * B), 2 * aH * aC * (a.r_H * A + a.r_C * B),
         aH * a.r_H * A + aC * a.r_C * B};
  r.candidates = {0.0, a.u2_max};
  const auto [c2, c1, c0] = r.P;
  auto add = [&](double u) {
    if (u > 0 && u < a.u2_max) r.candidates.push_back(u);
  };
  if (std::abs(c2) > 1e-300) {
    const double disc = c1 * c1 - 4 * c2 * c0;
    if (disc >= 0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (c1 + std::copysign(sq, c1));
      if (q != 0) {
        add(q / c2);
        add(c0 / q);
      }
    }
  } else if (std::abs(c1) > 1e-300) {
    add(-c0 / c1);
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double u : r.candidates) {
    const double v = psi(a, s, adj, u);
    if (v > best) {
      best = v;
      r.u2_star = u;
    }
  }
  return r;
}

namespace {

// mode: 1 HC boundary, 2 MTD, 3 H boundary
struct Shot {
  OdeTrajectory tr;
  double t_enter_H = kNaN;
  bool one_only_violated = false;
  bool valid = true;
};

DosePair family_dose(const AtomModel& a, int mode, const OdeState& s, double rho_H0) {
  if (mode == 1) return {boundary_u1_on_HC(a, a.u2_max, s.rho_H).u1, a.u2_max};
  if (mode == 3) return {boundary_u1_on_H(a, rho_H0, a.u2_max, s.rho_C).u1, a.u2_max};
  return {a.u1_max, a.u2_max};
}

Shot shoot(const AtomModel& a, const OdeState& start, double tf, double tau1, bool hc, double rho_H0, double dt,
           double one_only_tol) {
  Shot sh;
  const std::size_t n = step_count(tf, dt);
  const double L = a.theta_H * rho_H0;
  OdeState s = start;
  int mode = hc && tau1 > 0 ? 1 : 2;
  auto push = [&](double t, const DosePair& u) {
    sh.tr.t.push_back(t);
    sh.tr.rho_H.push_back(s.rho_H);
    sh.tr.rho_C.push_back(s.rho_C);
    sh.tr.u1.push_back(u.u1);
    sh.tr.u2.push_back(u.u2);
    sh.tr.mode.push_back(mode);
  };
  DosePair u{};
  for (std::size_t k = 0; k < n; ++k) {
    const double t = step_time(0.0, tf, n, k), t1 = step_time(0.0, tf, n, k + 1);
    if (mode == 1 && t >= tau1 - 1e-12) mode = 2;
    if (mode == 2 && s.rho_H <= L) {
      mode = 3;
      if (std::isnan(sh.t_enter_H)) sh.t_enter_H = t;
    }
    const double g1 = s.rho_H / (s.rho_H + s.rho_C);
    if (g1 - a.theta_HC <= one_only_tol && s.rho_H - L <= one_only_tol * rho_H0) sh.one_only_violated = true;
    u = family_dose(a, mode, s, rho_H0);
    push(t, u);
    OdeState nx = rk4_step(a, s, u, t1 - t);
    if (mode == 2 && nx.rho_H < L) {
      const double f = secant_crossing(0.0, s.rho_H - L, 1.0, nx.rho_H - L);
      const double tc = t + f * (t1 - t);
      s = rk4_step(a, s, u, tc - t);
      sh.t_enter_H = tc;
      mode = 3;
      nx = rk4_step(a, s, family_dose(a, 3, s, rho_H0), t1 - tc);
    }
    s = nx;
    if (!std::isfinite(s.rho_H) || !std::isfinite(s.rho_C)) {
      sh.valid = false;
      break;
    }
  }
  push(tf, u);
  return sh;
}

OdeState lerp(const OdeTrajectory& tr, std::size_t k, double w) {
  return {tr.rho_H[k] + w * (tr.rho_H[k + 1] - tr.rho_H[k]), tr.rho_C[k] + w * (tr.rho_C[k + 1] - tr.rho_C[k])};
}

}  // namespace

nlohmann::json SynthesisResult::to_json() const {
  nlohmann::json arcs_j = nlohmann::json::array();
  for (const auto& a : arcs) arcs_j.push_back({{"kind", arc_name(a.kind)}, {"t_start", a.t_start}, {"t_end", a.t_end}});
  nlohmann::json jn = nlohmann::json::array();
  for (const auto& j : junctions) jn.push_back({{"t", j.t}, {"kind", j.kind}, {"nu", std::isnan(j.nu) ? nlohmann::json() : nlohmann::json(j.nu)}});
  return {{"t_f", t_f},
          {"tau1", tau1},
          {"final_rho_C", final_rho_C},
          {"mtd_only_rho_C", mtd_only_rho_C},
          {"on_hc_at_start", on_hc_at_start},
          {"mtd_phi_negative", mtd_phi_negative},
          {"mtd_H_variation", mtd_H_variation},
          {"arcs", arcs_j},
          {"junctions", jn},
          {"hypotheses", hypotheses.to_json()}};
}

SynthesisResult synthesize_second_phase(const ModelParams& p, const DosePair& u_bar, double T2,
                                        const SynthesisOptions& opt) {
  if (!(T2 > 0)) throw DomainError("T2 must be positive");
  SynthesisResult res;
  const auto eq = equilibrium(p, u_bar);
  const double rho_H0 = std::isnan(opt.rho_H0) ? eq.rho_H_inf : opt.rho_H0;
  res.hypotheses = check_hypotheses(p, u_bar, rho_H0);
  if (opt.require_hypotheses && !res.hypotheses.ok()) {
    std::ostringstream os;
    os << "hypotheses fail at u_bar=(" << u_bar.u1 << "," << u_bar.u2 << ")";
    for (const auto& c : res.hypotheses.checks)
      if (!(c.applicable && c.pass)) os << " [" << c.id << "]";
    throw DomainError(os.str());
  }
  const AtomModel a = AtomModel::at(p, eq.x_H_inf, eq.x_C_inf);
  const OdeState start = opt.start.value_or(OdeState{eq.rho_H_inf, eq.rho_C_inf});
  if (!(start.rho_H > 0)) throw InfeasibleError("no healthy cells at phase-2 start");
  const double g1 = start.rho_H / (start.rho_H + start.rho_C);
  if (g1 < p.theta_HC - opt.hc_tol) {
    std::ostringstream os;
    os << "infeasible phase-2 start: g1=" << g1 << " < theta_HC=" << p.theta_HC;
    throw InfeasibleError(os.str());
  }
  if (start.rho_H < p.theta_H * rho_H0 * (1 - 1e-12)) throw InfeasibleError("infeasible phase-2 start: g2 < theta_H");
  res.on_hc_at_start = std::abs(g1 - p.theta_HC) <= opt.hc_tol;

  // scalar search over (t_f, tau1)
  double best = std::numeric_limits<double>::infinity();
  double best_tf = T2, best_tau = 0;
  const int ntf = std::max(1, opt.tf_candidates);
  const int ntau = res.on_hc_at_start ? std::max(1, opt.tau_candidates) : 0;
  auto eval = [&](double tf, double tau) {
    const Shot sh = shoot(a, start, tf, tau, res.on_hc_at_start, rho_H0, opt.dt, opt.one_only_tol);
    if (!sh.valid || sh.one_only_violated) return std::numeric_limits<double>::infinity();
    return sh.tr.rho_C.back();
  };
  for (int j = 1; j <= ntf; ++j) {
    const double tf = T2 * j / ntf;
    for (int i = 0; i <= ntau; ++i) {
      const double tau = ntau ? tf * i / ntau : 0.0;
      const double v = eval(tf, tau);
      if (v < best) {
        best = v;
        best_tf = tf;
        best_tau = tau;
      }
    }
  }
  if (!std::isfinite(best))
    throw NumericalError("no admissible candidate in the arc family (both constraints saturate)", 0.0, kNaN);
  if (ntf > 1) {
    const double lo = std::max(T2 / ntf * 0.5, best_tf - T2 / ntf), hi = std::min(T2, best_tf + T2 / ntf);
    const auto r = golden_min([&](double tf) { return eval(tf, std::min(best_tau, tf)); }, lo, hi, 1e-6);
    if (r.f < best) {
      best = r.f;
      best_tf = r.x;
      best_tau = std::min(best_tau, r.x);
    }
  }
  res.t_f = best_tf;
  res.tau1 = best_tau;
  const Shot sh = shoot(a, start, best_tf, best_tau, res.on_hc_at_start, rho_H0, opt.dt, opt.one_only_tol);
  if (sh.one_only_violated) throw NumericalError("both state constraints saturate simultaneously", 0.0, kNaN);
  res.traj = sh.tr;
  res.final_rho_C = sh.tr.rho_C.back();

  // arcs
  const auto& tr = res.traj;
  auto kind_of = [](int m) { return m == 1 ? ArcKind::hc_boundary : m == 2 ? ArcKind::mtd : ArcKind::h_boundary; };
  {
    Arc cur{kind_of(tr.mode[0]), 0.0, 0.0};
    for (std::size_t k = 1; k + 1 < tr.size(); ++k) {
      if (tr.mode[k] != tr.mode[k - 1]) {
        const double tk = tr.mode[k] == 3 && !std::isnan(sh.t_enter_H) ? sh.t_enter_H : tr.t[k];
        cur.t_end = tk;
        res.arcs.push_back(cur);
        cur = {kind_of(tr.mode[k]), tk, tk};
      }
    }
    cur.t_end = tr.t.back();
    res.arcs.push_back(cur);
  }

  // MTD throughout, for comparison
  res.mtd_only_rho_C = simulate_ode(a, start, ControlSchedule::constant(p.mtd(), T2), T2, opt.dt).rho_C.back();

  // backward adjoint from p_H(t_f) = 0, p_C(t_f) = -1
  const std::size_t n = tr.size();
  const ConstraintLevels lv{p.theta_H * rho_H0, p.gamma()};
  res.p_H.assign(n, 0);
  res.p_C.assign(n, 0);
  res.eta_1.assign(n, 0);
  res.eta_2.assign(n, 0);
  res.phi_1.assign(n, 0);
  res.H.assign(n, 0);
  AdjointState adj;
  adj.p_H = 0;
  adj.p_C = -1;
  auto eta1_on_H = [&](const OdeState& s, const DosePair& u, AdjointState q) {
    // keep phi_1 stationary along the H boundary
    q.eta_1 = 0;
    const auto dp = adjoint_rhs(a, s, q, u, lv);
    const double dH = a.R_H(s.rho_H, s.rho_C, u) * s.rho_H, dC = a.R_C(s.rho_H, s.rho_C, u) * s.rho_C;
    const double base = a.mu_H * (dp[0] * s.rho_H + q.p_H * dH) + a.mu_C * (dp[1] * s.rho_C + q.p_C * dC);
    return a.mu_H * s.rho_H > 0 ? std::max(0.0, -base / (a.mu_H * s.rho_H)) : 0.0;
  };
  auto rhs = [&](const OdeState& s, const DosePair& u, int mode, AdjointState q) {
    q.eta_1 = mode == 3 ? eta1_on_H(s, u, q) : 0.0;
    q.eta_2 = 0.0;
    return adjoint_rhs(a, s, q, u, lv);
  };
  auto record = [&](std::size_t k) {
    const OdeState s{tr.rho_H[k], tr.rho_C[k]};
    const DosePair u{tr.u1[k], tr.u2[k]};
    res.p_H[k] = adj.p_H;
    res.p_C[k] = adj.p_C;
    AdjointState q = adj;
    q.eta_1 = tr.mode[k] == 3 ? eta1_on_H(s, u, adj) : 0.0;
    res.eta_1[k] = q.eta_1;
    res.phi_1[k] = a.mu_H * adj.p_H * s.rho_H + a.mu_C * adj.p_C * s.rho_C;
    res.H[k] = hamiltonian(a, s, q, u, lv);
  };
  record(n - 1);
  for (std::size_t k = n - 1; k-- > 0;) {
    const DosePair u{tr.u1[k], tr.u2[k]};
    const int mode = tr.mode[k];
    const double h = tr.t[k + 1] - tr.t[k];
    // RK4 backwards in time on [t_k, t_{k+1}], state interpolated linearly
    auto f = [&](double w, const AdjointState& q) {
      const auto d = rhs(lerp(tr, k, w), u, mode, q);
      return d;
    };
    auto shift = [&](const std::array<double, 2>& d, double c) {
      AdjointState q = adj;
      q.p_H -= c * d[0];
      q.p_C -= c * d[1];
      return q;
    };
    const auto k1 = f(1.0, adj);
    const auto k2 = f(0.5, shift(k1, 0.5 * h));
    const auto k3 = f(0.5, shift(k2, 0.5 * h));
    const auto k4 = f(0.0, shift(k3, h));
    adj.p_H -= h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    adj.p_C -= h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    if (k > 0 && tr.mode[k] == 3 && tr.mode[k - 1] == 2) {
      // junction into the H boundary: Hamiltonian continuity fixes the jump in p_H
      const OdeState s{tr.rho_H[k], tr.rho_C[k]};
      const DosePair um{tr.u1[k - 1], tr.u2[k - 1]};
      const double Hp = adj.p_H * a.R_H(s.rho_H, s.rho_C, u) * s.rho_H + adj.p_C * a.R_C(s.rho_H, s.rho_C, u) * s.rho_C;
      const double RHm = a.R_H(s.rho_H, s.rho_C, um);
      Junction jn{sh.t_enter_H, "enter-H", kNaN};
      if (std::abs(RHm * s.rho_H) > 1e-14) {
        const double pHm = (Hp - adj.p_C * a.R_C(s.rho_H, s.rho_C, um) * s.rho_C) / (RHm * s.rho_H);
        jn.nu = adj.p_H - pHm;
        adj.p_H = pHm;
      }
      res.junctions.push_back(jn);
    } else if (k > 0 && tr.mode[k] == 2 && tr.mode[k - 1] == 1) {
      res.junctions.push_back({tr.t[k], "exit-HC", kNaN});
    }
    record(k);
  }
  std::reverse(res.junctions.begin(), res.junctions.end());

  // consistency on the MTD arc
  std::size_t cnt = 0, neg = 0;
  double hmin = std::numeric_limits<double>::infinity(), hmax = -hmin, hsum = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (tr.mode[k] != 2) continue;
    if (k > 0 && tr.mode[k - 1] != 2) continue;
    if (tr.mode[k + 1] != 2) continue;
    ++cnt;
    if (res.phi_1[k] < 0) ++neg;
    hmin = std::min(hmin, res.H[k]);
    hmax = std::max(hmax, res.H[k]);
    hsum += std::abs(res.H[k]);
  }
  if (cnt) {
    res.mtd_phi_negative = double(neg) / cnt;
    res.mtd_H_variation = (hmax - hmin) / std::max(hsum / cnt, 1e-300);
  }
  return res;
}

DiracOptimality dirac_optimality(const ModelParams& p, double rho_C0, double rho_H0, std::size_t n) {
  if (n < 2) throw DomainError("dirac_optimality needs at least 2 nodes");
  if (rho_C0 < 0 || rho_H0 < 0) throw DomainError("negative totals");
  const DosePair mtd = p.mtd();
  auto g = [&](double x) { return growth_rate_C(p, x, rho_C0, rho_H0, mtd); };
  DiracOptimality r;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = g(static_cast<double>(i) / (n - 1));
  r.node = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
  const double tol = 1e-10 * std::max(1.0, std::abs(v[r.node]));
  for (std::size_t i = 0; i < n; ++i)
    if (i + 1 < r.node || i > r.node + 1)
      if (v[i] <= v[r.node] + tol) r.unique = false;
  const double lo = r.node > 0 ? double(r.node - 1) / (n - 1) : 0.0;
  const double hi = r.node + 1 < n ? double(r.node + 1) / (n - 1) : 1.0;
  const auto m = golden_min(g, lo, hi, 1e-12);
  if (m.f <= v[r.node]) {
    r.x_C = m.x;
    r.value = m.f;
  } else {
    r.x_C = double(r.node) / (n - 1);
    r.value = v[r.node];
  }
  return r;
}

double logistic(double r, double d, double rho0, double t) {
  if (rho0 == 0) return 0;
  if (std::abs(r) < 1e-14) return rho0 / (1 + d * rho0 * t);
  const double e = std::exp(r * t);
  return rho0 * e / (1 + rho0 * d * std::expm1(r * t) / r);
}

ToyC1 toy_c1(double r, double d, double mu, double rho0, double T, double budget, const std::vector<double>& eps) {
  if (!(r > 0 && d > 0 && mu >= 0 && rho0 > 0 && T > 0 && budget > 0)) throw DomainError("toy_c1 needs positive data");
  ToyC1 out;
  out.rho_free = logistic(r, d, rho0, T);
  out.inf_value = out.rho_free * std::exp(-mu * budget);
  out.epsilons = eps;
  for (double e : eps) {
    if (!(e > 0 && e <= T)) throw DomainError("epsilon must lie in (0, T]");
    const double mid = logistic(r, d, rho0, T - e);
    out.epsilon_values.push_back(logistic(r - mu * budget / e, d, mid, e));
  }
  return out;
}

namespace {

// Euclidean projection onto {0 <= u <= umax, sum(u) h <= B}
void project_budget(std::vector<double>& u, double umax, double h, double B) {
  auto total = [&](double lam) {
    double s = 0;
    for (double v : u) s += std::clamp(v - lam, 0.0, umax);
    return s * h;
  };
  if (total(0.0) <= B) {
    project_box(u, 0.0, umax);
    return;
  }
  double lo = 0, hi = *std::max_element(u.begin(), u.end());
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (total(mid) > B ? lo : hi) = mid;
  }
  for (double& v : u) v = std::clamp(v - hi, 0.0, umax);
}

}  // namespace

ToyC2 toy_c2(double r, double d, double mu, double rho0, double T, double budget, double u_inf_max, std::size_t cells) {
  if (!(r > 0 && d > 0 && mu > 0 && rho0 > 0 && T > 0 && budget > 0 && u_inf_max > 0))
    throw DomainError("toy_c2 needs positive data");
  ToyC2 out;
  if (u_inf_max * T <= budget) {
    out.saturated = true;
    out.T1 = 0;
    out.note = "budget covers the whole horizon; optimal control is u_inf_max on [0,T]";
    out.schedule = ControlSchedule::constant({u_inf_max, 0.0}, T);
  } else {
    out.T1 = T - budget / u_inf_max;
    out.schedule = ControlSchedule({0.0, out.T1, T}, {{0.0, 0.0}, {u_inf_max, 0.0}});
  }
  out.value = logistic(r - mu * u_inf_max, d, logistic(r, d, rho0, out.T1), T - out.T1);

  // cross-check: projected gradient on the exponential-Euler discretization, objective ln rho(T)
  const std::size_t N = std::max<std::size_t>(cells, 2);
  const double h = T / N;
  std::vector<double> rho(N + 1);
  auto fg = [&](const std::vector<double>& u, std::vector<double>& g) {
    rho[0] = rho0;
    for (std::size_t k = 0; k < N; ++k) rho[k + 1] = rho[k] * std::exp((r - d * rho[k] - mu * u[k]) * h);
    g.assign(N, 0.0);
    double lam = 1.0;
    for (std::size_t k = N; k-- > 0;) {
      g[k] = -mu * h * lam;
      lam *= 1 - d * rho[k] * h;
    }
    return std::log(rho[N]);
  };
  SpgOptions so;
  so.max_iter = 2000;
  so.pg_tol = 1e-12;
  std::vector<double> u0(N, std::min(u_inf_max, budget / T));
  const auto res = spg_minimize(fg, [&](std::vector<double>& u) { project_budget(u, u_inf_max, h, budget); }, u0, so);
  out.u_numeric = res.x;
  out.value_numeric = std::exp(res.f);
  out.switch_numeric = T;
  for (std::size_t k = 0; k < N; ++k)
    if (res.x[k] > 0.5 * u_inf_max) {
      out.switch_numeric = k * h;
      break;
    }
  return out;
}

}  // namespace pheno
