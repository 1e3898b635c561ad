#include "pheno/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pheno/errors.hpp"
#include "pheno/numerics.hpp"

namespace pheno {

double fitness_ratio(const ModelParams& p, const DosePair& u, Population pop, double x) {
  if (pop == Population::H) return (p.r_H(x) / (1.0 + p.alpha_H * u.u2) - u.u1 * p.mu_H(x)) / p.d_H(x);
  return (p.r_C(x) / (1.0 + p.alpha_C * u.u2) - u.u1 * p.mu_C(x)) / p.d_C(x);
}

LimitIntensity limit_intensity(const ModelParams& p, const DosePair& u_bar, Population pop, std::size_t n) {
  check_dose(p, u_bar);
  if (n < 3) n = 3;
  auto f = [&](double x) { return fitness_ratio(p, u_bar, pop, x); };
  std::vector<double> xs(n), fs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = i == n - 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    fs[i] = f(xs[i]);
  }
  const double fgrid = *std::max_element(fs.begin(), fs.end());
  const double scan_tol = 1e-6 * (1.0 + std::abs(fgrid));

  std::vector<ScalarOpt> cand;
  for (std::size_t i = 0; i < n; ++i) {
    const bool left = i == 0 || fs[i] >= fs[i - 1];
    const bool right = i == n - 1 || fs[i] >= fs[i + 1];
    if (!(left && right) || fs[i] < fgrid - scan_tol) continue;
    const double a = xs[i == 0 ? 0 : i - 1], b = xs[i == n - 1 ? n - 1 : i + 1];
    cand.push_back(golden_max(f, a, b, 1e-10));
  }
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : cand) best = std::max(best, c.f);

  LimitIntensity out;
  out.f_max = best;
  out.I_inf = std::max(0.0, best);
  out.extinct = best <= 0.0;
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.x < b.x; });
  for (const auto& c : cand) {
    if (c.f < best - 1e-8) continue;
    if (!out.argmax.empty() && std::abs(c.x - out.argmax.back()) < 1e-6) continue;
    out.argmax.push_back(c.x);
  }
  return out;
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::coexistence: return "coexistence";
    case Regime::healthy_only: return "healthy-only";
    case Regime::cancer_only: return "cancer-only";
    case Regime::extinction: return "extinction";
  }
  return "?";
}

nlohmann::json EquilibriumReport::to_json() const {
  return {{"u_bar", {u_bar.u1, u_bar.u2}},
          {"I_H_inf", I_H_inf},
          {"I_C_inf", I_C_inf},
          {"rho_H_inf", rho_H_inf},
          {"rho_C_inf", rho_C_inf},
          {"x_H_inf", x_H_inf},
          {"x_C_inf", x_C_inf},
          {"A_H", A_H},
          {"A_C", A_C},
          {"singleton_H", singleton_H},
          {"singleton_C", singleton_C},
          {"regime", regime_name(regime)}};
}

EquilibriumReport equilibrium(const ModelParams& p, const DosePair& u_bar) {
  EquilibriumReport r;
  r.u_bar = u_bar;
  const auto LH = limit_intensity(p, u_bar, Population::H);
  const auto LC = limit_intensity(p, u_bar, Population::C);
  r.I_H_inf = LH.I_inf;
  r.I_C_inf = LC.I_inf;
  r.A_H = LH.argmax;
  r.A_C = LC.argmax;
  r.singleton_H = LH.singleton();
  r.singleton_C = LC.singleton();
  r.x_H_inf = r.A_H.empty() ? 0.0 : r.A_H.front();
  r.x_C_inf = r.A_C.empty() ? 0.0 : r.A_C.front();

  const double det = p.a_HH * p.a_CC - p.a_HC * p.a_CH;
  double rH = (r.I_H_inf * p.a_CC - p.a_HC * r.I_C_inf) / det;
  double rC = (p.a_HH * r.I_C_inf - p.a_CH * r.I_H_inf) / det;
  if (rH > 0 && rC > 0) {
    r.regime = Regime::coexistence;
  } else if (rH <= 0 && rC <= 0) {
    // pick the boundary state that is self-consistent
    rH = r.I_H_inf / p.a_HH;
    rC = r.I_C_inf / p.a_CC;
    if (rH == 0 && rC == 0) {
      r.regime = Regime::extinction;
    } else if (r.I_C_inf - p.a_CH * rH <= 0) {
      rC = 0;
      r.regime = Regime::healthy_only;
    } else {
      rH = 0;
      r.regime = Regime::cancer_only;
    }
  } else if (rH <= 0) {
    rH = 0;
    rC = r.I_C_inf / p.a_CC;
    r.regime = rC > 0 ? Regime::cancer_only : Regime::extinction;
  } else {
    rC = 0;
    rH = r.I_H_inf / p.a_HH;
    r.regime = rH > 0 ? Regime::healthy_only : Regime::extinction;
  }
  r.rho_H_inf = rH;
  r.rho_C_inf = rC;
  return r;
}

SinglePopulationLimit single_population_limit(const ModelParams& p, const DosePair& u_bar, Population pop) {
  SinglePopulationLimit out;
  const auto L = limit_intensity(p, u_bar, pop);
  out.I_inf = L.I_inf;
  out.rho_inf = L.I_inf / (pop == Population::H ? p.a_HH : p.a_CC);
  out.B_set = L.argmax;
  double mn = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double x = i / 2000.0;
    const double v = pop == Population::H ? p.r_H(x) / (1 + p.alpha_H * u_bar.u2) - u_bar.u1 * p.mu_H(x)
                                          : p.r_C(x) / (1 + p.alpha_C * u_bar.u2) - u_bar.u1 * p.mu_C(x);
    mn = std::min(mn, v);
  }
  out.min_drug_fitness = mn;
  out.viable = mn > 0;
  return out;
}

Mat2 lyapunov_matrix(const ModelParams& p, double lH, double lC) {
  const double off = lH * p.a_HC + lC * p.a_CH;
  return Mat2{{{2 * lH * p.a_HH, off}, {off, 2 * lC * p.a_CC}}};
}

Mat2 lyapunov_matrix(const ModelParams& p) { return lyapunov_matrix(p, 1.0 / p.a_HC, 1.0 / p.a_CH); }

double det2(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

double lyapunov_det_formula(const ModelParams& p) {
  return 4.0 * (p.a_HH * p.a_CC - p.a_HC * p.a_CH) / (p.a_HC * p.a_CH);
}

double lyapunov_quadratic(const ModelParams& p, const EquilibriumReport& rep, double rho_H, double rho_C) {
  const Mat2 M = lyapunov_matrix(p);
  const double X0 = rep.rho_H_inf - rho_H, X1 = rep.rho_C_inf - rho_C;
  return -0.5 * (M[0][0] * X0 * X0 + 2 * M[0][1] * X0 * X1 + M[1][1] * X1 * X1);
}

LyapunovSeries lyapunov_series(const ModelParams& p, const Trajectory& traj, const DosePair& u_bar,
                               const EquilibriumReport& rep) {
  LyapunovSeries s;
  if (!traj.grid) return s;
  const auto& g = *traj.grid;
  SampledModel m(p, traj.grid);
  const std::size_t kH = g.nearest(rep.x_H_inf), kC = g.nearest(rep.x_C_inf);
  s.atom_H = kH;
  s.atom_C = kC;
  const double lH = 1.0 / p.a_HC, lC = 1.0 / p.a_CH;
  const double IH = p.a_HH * rep.rho_H_inf + p.a_HC * rep.rho_C_inf;
  const double IC = p.a_CH * rep.rho_H_inf + p.a_CC * rep.rho_C_inf;
  (void)u_bar;

  for (const auto& snap : traj.snapshots) {
    const DosePair u = traj.schedule.empty() ? u_bar : traj.schedule.at(snap.t);
    auto Vi = [&](const std::vector<double>& n, const std::vector<double>& d, std::size_t k, double rho_inf) {
      double v = 0.0;
      for (std::size_t i = 0; i < n.size(); ++i) v += g.w(i) * n[i] / d[i];
      v -= rho_inf / d[k];
      if (rho_inf > 0) {
        if (!(n[k] > 0)) {
          s.ln_undefined = true;
          return std::numeric_limits<double>::quiet_NaN();
        }
        v += (rho_inf / d[k]) * std::log((rho_inf / g.w(k)) / n[k]);
      }
      return v;
    };
    auto Bi = [&](const std::vector<double>& n, Population pop, std::size_t k, double rho_inf) {
      const bool H = pop == Population::H;
      const auto& r = H ? m.r_H : m.r_C;
      const auto& d = H ? m.d_H : m.d_C;
      const auto& mu = H ? m.mu_H : m.mu_C;
      const double a = H ? p.alpha_H : p.alpha_C;
      const double I = H ? IH : IC;
      auto R = [&](std::size_t i) { return r[i] / (1 + a * u.u2) - d[i] * I - u.u1 * mu[i]; };
      double b = 0.0;
      for (std::size_t i = 0; i < n.size(); ++i) b += g.w(i) * R(i) * n[i] / d[i];
      return b - rho_inf * R(k) / d[k];
    };
    const double vh = Vi(snap.n_H.values, m.d_H, kH, rep.rho_H_inf);
    const double vc = Vi(snap.n_C.values, m.d_C, kC, rep.rho_C_inf);
    s.t.push_back(snap.t);
    s.V_H.push_back(vh);
    s.V_C.push_back(vc);
    s.V.push_back(lH * vh + lC * vc);
    s.quadratic_term.push_back(lyapunov_quadratic(p, rep, total_mass(snap.n_H), total_mass(snap.n_C)));
    s.B_H.push_back(Bi(snap.n_H.values, Population::H, kH, rep.rho_H_inf));
    s.B_C.push_back(Bi(snap.n_C.values, Population::C, kC, rep.rho_C_inf));
  }
  return s;
}

double SpeedDiagnostics::min_exponent() const {
  return std::min({conc_H.exponent, conc_C.exponent, rho_H.exponent, rho_C.exponent});
}

SpeedFit envelope_fit(const std::vector<double>& t, const std::vector<double>& y, double t_min, double power) {
  SpeedFit fit;
  const std::size_t n = std::min(t.size(), y.size());
  std::vector<double> env(n);
  double run = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    run = std::max(run, std::abs(y[i]));
    env[i] = run;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] < t_min || t[i] <= 1.0) continue;
    if (env[i] < 1e-12) {
      fit.truncated = true;
      break;
    }
    lx.push_back(power * std::log(std::log(t[i]) / t[i]));
    ly.push_back(std::log(env[i]));
  }
  fit.points = lx.size();
  if (lx.size() >= 3) {
    fit.exponent = ls_slope(lx, ly);
    fit.ok = std::isfinite(fit.exponent);
  }
  return fit;
}

SpeedDiagnostics speed_diagnostics(const ModelParams& p, const Trajectory& traj, const EquilibriumReport& rep,
                                   double t_min, double eps_ball) {
  SpeedDiagnostics d;
  if (!traj.grid) return d;
  const auto& g = *traj.grid;
  SampledModel m(p, traj.grid);
  const double IH = p.a_HH * rep.rho_H_inf + p.a_HC * rep.rho_C_inf;
  const double IC = p.a_CH * rep.rho_H_inf + p.a_CC * rep.rho_C_inf;
  const DosePair u = rep.u_bar;
  for (const auto& s : traj.snapshots) {
    double rh = 0, rc = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double RH = m.r_H[i] / (1 + p.alpha_H * u.u2) - m.d_H[i] * IH - u.u1 * m.mu_H[i];
      const double RC = m.r_C[i] / (1 + p.alpha_C * u.u2) - m.d_C[i] * IC - u.u1 * m.mu_C[i];
      rh += g.w(i) * RH * s.n_H.values[i] / m.d_H[i];
      rc += g.w(i) * RC * s.n_C.values[i] / m.d_C[i];
    }
    d.t.push_back(s.t);
    d.residual_H.push_back(rh);
    d.residual_C.push_back(rc);
    d.mass_outside_H.push_back(concentration_metrics(s.n_H, rep.x_H_inf, eps_ball).mass_outside);
    d.mass_outside_C.push_back(concentration_metrics(s.n_C, rep.x_C_inf, eps_ball).mass_outside);
  }
  const std::size_t stride = std::max<std::size_t>(1, traj.size() / 2000);
  for (std::size_t k = 0; k < traj.size(); k += stride) {
    d.t_rho.push_back(traj.t[k]);
    d.gap_rho_H.push_back(std::abs(traj.rho_H[k] - rep.rho_H_inf));
    d.gap_rho_C.push_back(std::abs(traj.rho_C[k] - rep.rho_C_inf));
  }
  d.conc_H = envelope_fit(d.t, d.residual_H, t_min, 1.0);
  d.conc_C = envelope_fit(d.t, d.residual_C, t_min, 1.0);
  d.rho_H = envelope_fit(d.t_rho, d.gap_rho_H, t_min, 0.5);
  d.rho_C = envelope_fit(d.t_rho, d.gap_rho_C, t_min, 0.5);
  return d;
}

}  // namespace pheno
