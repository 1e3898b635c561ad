#include "pheno/ide_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pheno/errors.hpp"
#include "pheno/numerics.hpp"

namespace pheno {

ControlSchedule::ControlSchedule(std::vector<double> breaks, std::vector<DosePair> doses)
    : breaks_(std::move(breaks)), doses_(std::move(doses)) {
  if (breaks_.size() != doses_.size() + 1) throw DomainError("schedule needs one more breakpoint than doses");
  for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
    if (!(breaks_[i + 1] > breaks_[i])) throw DomainError("schedule breakpoints must be strictly increasing");
}

ControlSchedule ControlSchedule::constant(const DosePair& u, double T) {
  if (!(T > 0.0)) throw DomainError("schedule horizon must be positive");
  return ControlSchedule({0.0, T}, {u});
}

ControlSchedule ControlSchedule::uniform(const std::vector<double>& u1, const std::vector<double>& u2, double T) {
  if (u1.size() != u2.size() || u1.empty()) throw DomainError("uniform schedule needs equal nonempty dose vectors");
  const std::size_t n = u1.size();
  std::vector<double> b(n + 1);
  std::vector<DosePair> d(n);
  for (std::size_t k = 0; k <= n; ++k) b[k] = step_time(0.0, T, n, k);
  for (std::size_t k = 0; k < n; ++k) d[k] = {u1[k], u2[k]};
  return ControlSchedule(std::move(b), std::move(d));
}

DosePair ControlSchedule::at(double t) const {
  if (doses_.empty()) return {};
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  if (it == breaks_.begin()) return doses_.front();
  std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
  return doses_[std::min(i, doses_.size() - 1)];
}

double ControlSchedule::total_variation() const {
  double tv = 0.0;
  for (std::size_t i = 1; i < doses_.size(); ++i)
    tv += std::abs(doses_[i].u1 - doses_[i - 1].u1) + std::abs(doses_[i].u2 - doses_[i - 1].u2);
  return tv;
}

void ControlSchedule::validate(const ModelParams& p) const {
  for (const auto& d : doses_) check_dose(p, d);
}

void ControlSchedule::append(double t_end, const DosePair& u) {
  if (breaks_.empty()) throw DomainError("append on an empty schedule needs a start time");
  if (!(t_end > breaks_.back())) return;
  if (!doses_.empty() && doses_.back() == u) {
    breaks_.back() = t_end;
    return;
  }
  doses_.push_back(u);
  breaks_.push_back(t_end);
}

void ControlSchedule::append(const ControlSchedule& other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  for (std::size_t i = 0; i < other.doses_.size(); ++i) append(other.breaks_[i + 1], other.doses_[i]);
}

Policy constant_policy(const DosePair& u) {
  Policy p;
  p.name = "constant";
  p.mode_names = {"constant"};
  p.rule = [u](const PolicyObservation& o) { return PolicyDecision{u, o.mode}; };
  return p;
}

void Trajectory::extend(const Trajectory& next) {
  if (next.size() == 0) return;
  if (size() == 0) {
    *this = next;
    return;
  }
  // the first entry of `next` duplicates our last state
  auto cat = [](auto& a, const auto& b) { a.insert(a.end(), b.begin() + 1, b.end()); };
  u1.back() = next.u1.front();
  u2.back() = next.u2.front();
  mode.back() = next.mode.front();
  cat(t, next.t);
  cat(rho_H, next.rho_H);
  cat(rho_C, next.rho_C);
  cat(rho_CS, next.rho_CS);
  cat(rho_CR, next.rho_CR);
  cat(u1, next.u1);
  cat(u2, next.u2);
  cat(g1, next.g1);
  cat(g2, next.g2);
  cat(mode, next.mode);
  for (const auto& s : next.snapshots)
    if (snapshots.empty() || s.t > snapshots.back().t) snapshots.push_back(s);
  schedule.append(next.schedule);
  final_H = next.final_H;
  final_C = next.final_C;
  for (const auto& n : next.mode_names)
    if (std::find(mode_names.begin(), mode_names.end(), n) == mode_names.end()) mode_names.push_back(n);
}

void ExponentialStepper::rates(double rho_H, double rho_C, const DosePair& u, std::vector<double>& R_H,
                               std::vector<double>& R_C) const {
  const auto& m = *m_;
  const auto& p = m.params;
  const std::size_t n = m.grid->size();
  R_H.resize(n);
  R_C.resize(n);
  const double sH = 1.0 / (1.0 + p.alpha_H * u.u2);
  const double sC = 1.0 / (1.0 + p.alpha_C * u.u2);
  const double IH = p.a_HH * rho_H + p.a_HC * rho_C;
  const double IC = p.a_CH * rho_H + p.a_CC * rho_C;
  for (std::size_t i = 0; i < n; ++i) {
    R_H[i] = m.r_H[i] * sH - m.d_H[i] * IH - u.u1 * m.mu_H[i];
    R_C[i] = m.r_C[i] * sC - m.d_C[i] * IC - u.u1 * m.mu_C[i];
  }
}

void ExponentialStepper::step(std::vector<double>& n_H, std::vector<double>& n_C, const DosePair& u, double dt,
                              bool corrector) {
  const auto& g = *m_->grid;
  const double rH = g.integrate(n_H), rC = g.integrate(n_C);
  rates(rH, rC, u, RH_, RC_);
  const std::size_t n = n_H.size();
  if (!corrector) {
    for (std::size_t i = 0; i < n; ++i) {
      n_H[i] *= std::exp(RH_[i] * dt);
      n_C[i] *= std::exp(RC_[i] * dt);
    }
    return;
  }
  tmpH_.resize(n);
  tmpC_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tmpH_[i] = n_H[i] * std::exp(RH_[i] * dt);
    tmpC_[i] = n_C[i] * std::exp(RC_[i] * dt);
  }
  rates(g.integrate(tmpH_), g.integrate(tmpC_), u, RH2_, RC2_);
  for (std::size_t i = 0; i < n; ++i) {
    n_H[i] *= std::exp(0.5 * (RH_[i] + RH2_[i]) * dt);
    n_C[i] *= std::exp(0.5 * (RC_[i] + RC2_[i]) * dt);
  }
}

double step_time(double t0, double T, std::size_t n, std::size_t k) {
  return t0 + T * static_cast<double>(k) / static_cast<double>(n);
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  if (!(T > 0.0)) throw DomainError("horizon must be positive");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(T / dt)));
}

namespace {

struct Recorder {
  Trajectory& tr;
  const PhenotypeGrid& g;
  double theta_HC, theta_H;

  void push(double t, const std::vector<double>& nH, const std::vector<double>& nC, const DosePair& u, int mode) {
    const double rH = g.integrate(nH), rC = g.integrate(nC);
    double cs = 0.0, cr = 0.0;
    for (std::size_t i = 0; i < nC.size(); ++i) {
      cs += g.w(i) * (1.0 - g.x(i)) * nC[i];
      cr += g.w(i) * g.x(i) * nC[i];
    }
    tr.t.push_back(t);
    tr.rho_H.push_back(rH);
    tr.rho_C.push_back(rC);
    tr.rho_CS.push_back(cs);
    tr.rho_CR.push_back(cr);
    tr.u1.push_back(u.u1);
    tr.u2.push_back(u.u2);
    tr.g1.push_back(rH + rC > 0 ? rH / (rH + rC) : 0.0);
    tr.g2.push_back(tr.rho_H0 > 0 ? rH / tr.rho_H0 : 0.0);
    tr.mode.push_back(mode);
  }
};

void check_finite(const PhenotypeGrid& g, const std::vector<double>& nH, const std::vector<double>& nC, double t) {
  for (std::size_t i = 0; i < nH.size(); ++i) {
    if (!std::isfinite(nH[i]) || !std::isfinite(nC[i])) {
      std::ostringstream os;
      os << "nonfinite density at t=" << t << ", x=" << g.x(i) << " (" << (std::isfinite(nH[i]) ? "n_C" : "n_H")
         << ")";
      throw NumericalError(os.str(), t, g.x(i));
    }
  }
}

std::vector<std::size_t> snapshot_steps(std::size_t n, int count) {
  std::vector<std::size_t> s;
  if (count <= 0) return s;
  for (int j = 0; j <= count; ++j) {
    const std::size_t k = static_cast<std::size_t>(std::llround(static_cast<double>(j) * n / count));
    if (s.empty() || k > s.back()) s.push_back(k);
  }
  return s;
}

void check_inputs(const ModelParams& p, const Density& a, const Density& b) {
  if (!a.grid || !b.grid || a.size() != b.size()) throw DomainError("initial densities must share one grid");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.values[i] < 0 || b.values[i] < 0) throw DomainError("initial densities must be nonnegative");
  (void)p;
}

template <class DoseFn>
Trajectory integrate(const ModelParams& p, const Density& n_H0, const Density& n_C0, double T, const SimOptions& opt,
                     DoseFn&& dose_for_step, const ControlSchedule* open_loop) {
  check_inputs(p, n_H0, n_C0);
  const std::size_t n = step_count(T, opt.dt);
  SampledModel m(p, n_H0.grid);
  ExponentialStepper stepper(m);
  const auto& g = *m.grid;

  Trajectory tr;
  tr.grid = m.grid;
  tr.rho_H0 = std::isnan(opt.rho_H0) ? total_mass(n_H0) : opt.rho_H0;
  tr.t.reserve(n + 1);
  Recorder rec{tr, g, p.theta_HC, p.theta_H};

  std::vector<double> nH = n_H0.values, nC = n_C0.values;
  const auto snaps = snapshot_steps(n, opt.n_snapshots);
  std::size_t next_snap = 0;
  double rho_C_prev = std::numeric_limits<double>::quiet_NaN();
  int mode = 0;
  tr.schedule = ControlSchedule({opt.t0, opt.t0 + T}, {DosePair{}});
  ControlSchedule realized;
  bool first = true;

  for (std::size_t k = 0; k < n; ++k) {
    const double t = step_time(opt.t0, T, n, k);
    const double t1 = step_time(opt.t0, T, n, k + 1);
    if (next_snap < snaps.size() && snaps[next_snap] == k) {
      tr.snapshots.push_back({t, Density(m.grid, nH), Density(m.grid, nC)});
      ++next_snap;
    }
    PolicyDecision dec = dose_for_step(k, t, nH, nC, m, rho_C_prev, mode);
    check_dose(p, dec.dose);
    mode = dec.mode;
    rec.push(t, nH, nC, dec.dose, mode);
    rho_C_prev = tr.rho_C.back();

    if (open_loop) {
      // subdivide at breakpoints strictly inside the step
      double a = t;
      const auto& br = open_loop->breaks();
      auto it = std::upper_bound(br.begin(), br.end(), t);
      while (it != br.end() && *it < t1 && (t1 - *it) > 1e-14 * std::max(1.0, std::abs(t1))) {
        const double b = *it;
        stepper.step(nH, nC, open_loop->at(0.5 * (a + b)), b - a, opt.corrector);
        a = b;
        ++it;
      }
      stepper.step(nH, nC, a == t ? dec.dose : open_loop->at(0.5 * (a + t1)), t1 - a, opt.corrector);
    } else {
      stepper.step(nH, nC, dec.dose, t1 - t, opt.corrector);
      if (first) {
        realized = ControlSchedule({t, t1}, {dec.dose});
        first = false;
      } else {
        realized.append(t1, dec.dose);
      }
    }
    check_finite(g, nH, nC, t1);
  }
  const double tend = step_time(opt.t0, T, n, n);
  rec.push(tend, nH, nC, DosePair{tr.u1.back(), tr.u2.back()}, mode);
  if (next_snap < snaps.size()) tr.snapshots.push_back({tend, Density(m.grid, nH), Density(m.grid, nC)});
  tr.final_H = Density(m.grid, nH);
  tr.final_C = Density(m.grid, nC);
  if (open_loop) {
    std::vector<double> b{opt.t0};
    std::vector<DosePair> d;
    for (std::size_t i = 0; i < open_loop->pieces(); ++i) {
      const double lo = open_loop->breaks()[i], hi = open_loop->breaks()[i + 1];
      if (hi <= opt.t0 || lo >= tend) continue;
      d.push_back(open_loop->doses()[i]);
      b.push_back(std::min(hi, tend));
    }
    if (b.back() < tend) {
      b.back() = tend;
    }
    tr.schedule = d.empty() ? ControlSchedule::constant(open_loop->at(opt.t0), T) : ControlSchedule(b, d);
  } else {
    tr.schedule = realized;
  }
  return tr;
}

}  // namespace

Trajectory simulate(const ModelParams& p, const Density& n_H0, const Density& n_C0, const ControlSchedule& schedule,
                    double T, const SimOptions& opt) {
  if (schedule.empty()) throw DomainError("empty control schedule");
  schedule.validate(p);
  auto dose = [&](std::size_t, double t, const std::vector<double>&, const std::vector<double>&, const SampledModel&,
                  double, int) { return PolicyDecision{schedule.at(t), 0}; };
  Trajectory tr = integrate(p, n_H0, n_C0, T, opt, dose, &schedule);
  tr.mode_names = {"open-loop"};
  return tr;
}

Trajectory simulate_closed_loop(const ModelParams& p, const Density& n_H0, const Density& n_C0, const Policy& policy,
                                double T, const SimOptions& opt) {
  if (!policy.rule) throw DomainError("policy has no decision rule");
  const double rho_H0 = std::isnan(opt.rho_H0) ? total_mass(n_H0) : opt.rho_H0;
  bool started = false;
  auto dose = [&](std::size_t, double t, const std::vector<double>& nH, const std::vector<double>& nC,
                  const SampledModel& m, double rho_C_prev, int mode) {
    PolicyObservation o;
    o.t = t;
    o.rho_H = m.grid->integrate(nH);
    o.rho_C = m.grid->integrate(nC);
    o.rho_H0 = rho_H0;
    o.rho_C_prev = rho_C_prev;
    o.mode = started ? mode : policy.initial_mode;
    o.model = &m;
    o.n_H = &nH;
    o.n_C = &nC;
    started = true;
    PolicyDecision d = policy.rule(o);
    d.dose.u1 = std::clamp(d.dose.u1, 0.0, p.u1_max);
    d.dose.u2 = std::clamp(d.dose.u2, 0.0, p.u2_max);
    return d;
  };
  Trajectory tr = integrate(p, n_H0, n_C0, T, opt, dose, nullptr);
  tr.mode_names = policy.mode_names;
  return tr;
}

ConstraintReport constraint_report(const Trajectory& tr, const ModelParams& p, double tol) {
  ConstraintReport r;
  if (tr.size() == 0) return r;
  r.min_g1_margin = r.min_g2_margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const double m1 = tr.g1[k] - p.theta_HC, m2 = tr.g2[k] - p.theta_H;
    r.min_g1_margin = std::min(r.min_g1_margin, m1);
    r.min_g2_margin = std::min(r.min_g2_margin, m2);
    if (!r.first_violation && (m1 < -tol || m2 < -tol)) {
      const bool hc = m1 < -tol;
      r.violated = hc ? "HC" : "H";
      if (k == 0) {
        r.first_violation = tr.t[0];
      } else {
        const double f0 = hc ? tr.g1[k - 1] - p.theta_HC + tol : tr.g2[k - 1] - p.theta_H + tol;
        const double f1 = (hc ? m1 : m2) + tol;
        r.first_violation = secant_crossing(tr.t[k - 1], f0, tr.t[k], f1);
      }
    }
  }
  return r;
}

}  // namespace pheno
