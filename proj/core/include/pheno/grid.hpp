#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace pheno {

/// Uniform nodes on [0,1] with trapezoidal weights.
class PhenotypeGrid {
 public:
  explicit PhenotypeGrid(std::size_t n_points);

  std::size_t size() const { return x_.size(); }
  double h() const { return h_; }
  double x(std::size_t i) const { return x_[i]; }
  double w(std::size_t i) const { return w_[i]; }
  const std::vector<double>& nodes() const { return x_; }
  const std::vector<double>& weights() const { return w_; }

  std::size_t nearest(double x) const;
  double integrate(const std::vector<double>& f) const;
  double integrate(const std::vector<double>& f, const std::vector<double>& g) const;

 private:
  double h_;
  std::vector<double> x_;
  std::vector<double> w_;
};

using GridPtr = std::shared_ptr<const PhenotypeGrid>;

GridPtr make_grid(std::size_t n_points);

struct Density {
  GridPtr grid;
  std::vector<double> values;

  Density() = default;
  explicit Density(GridPtr g);
  Density(GridPtr g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  Density& operator*=(double a);
};

Density operator+(const Density& a, const Density& b);
Density operator*(double a, const Density& d);

double total_mass(const Density& d);
double weighted_mass(const Density& d, const std::function<double(double)>& weight);

Density gaussian_init(GridPtr grid, double center, double eps, double target_mass);
Density constant_density(GridPtr grid, double value);
Density zero_density(GridPtr grid);
/// Discrete Dirac of weight w at node k: value w / w_k at k, zero elsewhere.
Density dirac(GridPtr grid, std::size_t k, double weight);

struct ConcentrationMetrics {
  double mass = 0.0;
  double mass_outside = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  bool defined = false;
};

/// mass_outside integrates the piecewise-linear interpolant over |x - x_star| > eps_ball.
ConcentrationMetrics concentration_metrics(const Density& d, double x_star, double eps_ball);

/// Index of the node with the largest value.
std::size_t argmax_node(const Density& d);

void write_density_csv(std::ostream& os, const Density& d, const char* value_name = "n");

}  // namespace pheno
