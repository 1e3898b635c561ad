#include "pheno/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "pheno/errors.hpp"

namespace pheno {

PhenotypeGrid::PhenotypeGrid(std::size_t n) {
  if (n < 3) throw DomainError("phenotype grid needs at least 3 nodes");
  h_ = 1.0 / static_cast<double>(n - 1);
  x_.resize(n);
  w_.assign(n, h_);
  for (std::size_t i = 0; i < n; ++i) x_[i] = static_cast<double>(i) * h_;
  x_.back() = 1.0;
  w_.front() = w_.back() = 0.5 * h_;
}

std::size_t PhenotypeGrid::nearest(double x) const {
  if (x <= 0.0) return 0;
  if (x >= 1.0) return size() - 1;
  return static_cast<std::size_t>(std::lround(x / h_));
}

double PhenotypeGrid::integrate(const std::vector<double>& f) const {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w_[i] * f[i];
  return s;
}

double PhenotypeGrid::integrate(const std::vector<double>& f, const std::vector<double>& g) const {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w_[i] * f[i] * g[i];
  return s;
}

GridPtr make_grid(std::size_t n) { return std::make_shared<const PhenotypeGrid>(n); }

Density::Density(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}

Density::Density(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid->size()) throw DomainError("density size does not match grid");
  for (double x : values)
    if (x < 0.0) throw DomainError("density values must be nonnegative");
}

Density& Density::operator*=(double a) {
  for (auto& v : values) v *= a;
  return *this;
}

Density operator+(const Density& a, const Density& b) {
  if (a.grid != b.grid && a.size() != b.size()) throw DomainError("densities live on different grids");
  Density r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r.values[i] += b.values[i];
  return r;
}

Density operator*(double a, const Density& d) {
  Density r = d;
  r *= a;
  return r;
}

double total_mass(const Density& d) { return d.grid->integrate(d.values); }

double weighted_mass(const Density& d, const std::function<double(double)>& weight) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) s += d.grid->w(i) * weight(d.grid->x(i)) * d.values[i];
  return s;
}

Density gaussian_init(GridPtr grid, double center, double eps, double target_mass) {
  if (!(eps > 0.0)) throw DomainError("gaussian width must be positive");
  if (!(target_mass > 0.0)) throw DomainError("target mass must be positive");
  Density d(grid);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double z = grid->x(i) - center;
    d.values[i] = std::exp(-z * z / eps);
  }
  d *= target_mass / total_mass(d);
  return d;
}

Density constant_density(GridPtr grid, double value) {
  Density d(grid);
  std::fill(d.values.begin(), d.values.end(), value);
  return d;
}

Density zero_density(GridPtr grid) { return Density(std::move(grid)); }

Density dirac(GridPtr grid, std::size_t k, double weight) {
  if (k >= grid->size()) throw DomainError("dirac node out of range");
  Density d(grid);
  d.values[k] = weight / grid->w(k);
  return d;
}

ConcentrationMetrics concentration_metrics(const Density& d, double x_star, double eps_ball) {
  if (!(eps_ball > 0.0)) throw DomainError("ball radius must be positive");
  ConcentrationMetrics m;
  const auto& g = *d.grid;
  m.mass = total_mass(d);
  const double lo = x_star - eps_ball, hi = x_star + eps_ball;
  auto seg = [&](std::size_t i, double a, double b) {
    // integral of the linear interpolant on [a,b] inside cell i
    if (b <= a) return 0.0;
    const double x0 = g.x(i), x1 = g.x(i + 1);
    const double f0 = d.values[i], f1 = d.values[i + 1];
    auto f = [&](double x) { return f0 + (f1 - f0) * (x - x0) / (x1 - x0); };
    return 0.5 * (b - a) * (f(a) + f(b));
  };
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    const double a = g.x(i), b = g.x(i + 1);
    m.mass_outside += seg(i, a, std::min(b, lo));
    m.mass_outside += seg(i, std::max(a, hi), b);
  }
  if (m.mass > 0.0) {
    m.defined = true;
    double s1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s1 += g.w(i) * g.x(i) * d.values[i];
    m.mean = s1 / m.mass;
    double s2 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double z = g.x(i) - m.mean;
      s2 += g.w(i) * z * z * d.values[i];
    }
    m.variance = s2 / m.mass;
  }
  return m;
}

std::size_t argmax_node(const Density& d) {
  return static_cast<std::size_t>(std::max_element(d.values.begin(), d.values.end()) - d.values.begin());
}

void write_density_csv(std::ostream& os, const Density& d, const char* value_name) {
  os << "x," << value_name << "\n";
  os.precision(17);
  for (std::size_t i = 0; i < d.size(); ++i) os << d.grid->x(i) << ',' << d.values[i] << '\n';
}

}  // namespace pheno
