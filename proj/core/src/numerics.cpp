#include "pheno/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "pheno/errors.hpp"

namespace pheno {

namespace {
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;
}

ScalarOpt golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  if (b < a) std::swap(a, b);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  // endpoints can beat interior probes when the max sits on the boundary
  ScalarOpt best{0.5 * (a + b), f(0.5 * (a + b))};
  const double fa = f(a), fb = f(b);
  if (fa > best.f) best = {a, fa};
  if (fb > best.f) best = {b, fb};
  return best;
}

ScalarOpt golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  auto r = golden_max([&](double x) { return -f(x); }, a, b, tol);
  return {r.x, -r.f};
}

void project_box(std::vector<double>& x, double lo, double hi) {
  for (auto& v : x) v = std::clamp(v, lo, hi);
}

SpgResult spg_minimize(const ObjectiveFn& fg, const ProjectFn& project, std::vector<double> x0,
                       const SpgOptions& opt) {
  const std::size_t n = x0.size();
  SpgResult res;
  std::vector<double> x = std::move(x0);
  project(x);
  std::vector<double> g(n), gn(n), xn(n), d(n);
  double f = fg(x, g);
  res.evaluations = 1;
  if (!std::isfinite(f)) throw NumericalError("objective is not finite at the starting point", 0.0, 0.0);

  std::deque<double> hist{f};
  auto pg_norm = [&](const std::vector<double>& xx, const std::vector<double>& gg) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = xx[i] - gg[i];
    project(y);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(y[i] - xx[i]));
    return m;
  };

  double pg = pg_norm(x, g);
  double gmax = 0.0;
  for (double v : g) gmax = std::max(gmax, std::abs(v));
  double lambda = gmax > 0 ? std::clamp(1.0 / gmax, opt.step_min, opt.step_max) : 1.0;

  int it = 0;
  for (; it < opt.max_iter && pg > opt.pg_tol; ++it) {
    for (std::size_t i = 0; i < n; ++i) d[i] = x[i] - lambda * g[i];
    project(d);
    double gtd = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d[i] -= x[i];
      gtd += g[i] * d[i];
    }
    if (gtd >= 0.0) break;

    const double fmax = *std::max_element(hist.begin(), hist.end());
    double alpha = 1.0;
    double fn = 0.0;
    int bt = 0;
    for (;; ++bt) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + alpha * d[i];
      fn = fg(xn, gn);
      ++res.evaluations;
      if (std::isfinite(fn) && fn <= fmax + opt.gamma * alpha * gtd) break;
      if (bt >= opt.max_backtracks) break;
      // safeguarded quadratic interpolation
      double a_new = std::isfinite(fn) ? -0.5 * gtd * alpha * alpha / (fn - f - alpha * gtd) : 0.5 * alpha;
      if (!(a_new >= 0.1 * alpha && a_new <= 0.9 * alpha)) a_new = 0.5 * alpha;
      alpha = a_new;
    }
    if (!std::isfinite(fn) || bt >= opt.max_backtracks) break;

    double sts = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = xn[i] - x[i];
      const double y = gn[i] - g[i];
      sts += s * s;
      sty += s * y;
    }
    const double f_old = f;
    x.swap(xn);
    g.swap(gn);
    f = fn;
    hist.push_back(f);
    if (static_cast<int>(hist.size()) > opt.memory) hist.pop_front();
    lambda = sty <= 0.0 ? opt.step_max : std::clamp(sts / sty, opt.step_min, opt.step_max);
    pg = pg_norm(x, g);
    if (opt.f_rel_tol > 0.0 && std::abs(f_old - f) <= opt.f_rel_tol * std::max(1.0, std::abs(f))) {
      ++it;
      break;
    }
  }
  res.x = std::move(x);
  res.f = f;
  res.pg_norm = pg;
  res.iterations = it;
  res.converged = pg <= opt.pg_tol;
  return res;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

double secant_crossing(double t0, double f0, double t1, double f1) {
  if (f1 == f0) return t1;
  return t0 + (t1 - t0) * (f0 / (f0 - f1));
}

}  // namespace pheno
