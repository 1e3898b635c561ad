#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

namespace pheno {

struct ScalarOpt {
  double x;
  double f;
};

// Golden-section search for a maximum of a unimodal f on [a, b].
ScalarOpt golden_max(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);
ScalarOpt golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-10);

// Value and gradient at x. Writes gradient into g, returns f.
using ObjectiveFn = std::function<double(const std::vector<double>& x, std::vector<double>& g)>;
using ProjectFn = std::function<void(std::vector<double>& x)>;

struct SpgOptions {
  int max_iter = 500;
  int memory = 10;            // nonmonotone window
  double gamma = 1e-4;        // Armijo constant
  double step_min = 1e-12;
  double step_max = 1e12;
  double pg_tol = 1e-8;       // sup-norm of the projected gradient step
  double f_rel_tol = 0.0;     // optional relative decrease stop
  int max_backtracks = 40;
};

struct SpgResult {
  std::vector<double> x;
  double f = 0.0;
  double pg_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

// Spectral projected gradient (Birgin-Martinez-Raydan, SPG2 variant).
SpgResult spg_minimize(const ObjectiveFn& fg, const ProjectFn& project, std::vector<double> x0,
                       const SpgOptions& opt = {});

void project_box(std::vector<double>& x, double lo, double hi);

// Least-squares slope of y against x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

// Linear interpolation for the zero crossing of f between (t0,f0) and (t1,f1).
double secant_crossing(double t0, double f0, double t1, double f1);

}  // namespace pheno
