#include "gfab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfab {

namespace {

// int_0^h |a + (b - a) t / h| dt.
double abs_linear(double a, double b, double h) {
  if ((a >= 0.0) == (b >= 0.0)) return 0.5 * h * std::abs(a + b);
  const double denom = std::abs(a) + std::abs(b);
  return 0.5 * h * (a * a + b * b) / denom;
}

double sq_linear(double a, double b, double h) { return h * (a * a + a * b + b * b) / 3.0; }

template <class Piece>
double integrate_difference(const GridFunction& f, const GridFunction& g, Piece piece) {
  const GridFunction gr = g.grid().same_as(f.grid()) ? g : g.resample(f.grid());
  const auto x = f.grid().nodes();
  const auto a = f.values();
  const auto b = gr.values();
  double d_prev = a[0] - b[0];
  double total = piece(d_prev, d_prev, x[0] - 1.0);
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double d = a[i] - b[i];
    total += piece(d_prev, d, x[i] - x[i - 1]);
    d_prev = d;
  }
  return total;
}

}  // namespace

Grid::Grid(std::vector<double> nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("Grid: need at least two nodes");
  if (!(nodes.front() > 1.0)) throw std::invalid_argument("Grid: nodes must exceed 1");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("Grid: nodes must be strictly increasing");
  }
  nodes_ = std::make_shared<const std::vector<double>>(std::move(nodes));
}

Grid Grid::log_spaced(int n, double node_eps, double x_max) {
  if (n < 2) throw std::invalid_argument("Grid: need at least two nodes");
  if (!(node_eps > 0.0) || !(x_max > 1.0 + node_eps)) {
    throw std::invalid_argument("Grid: need 0 < node_eps < x_max - 1");
  }
  std::vector<double> x(n);
  const double lo = std::log(node_eps);
  const double hi = std::log(x_max - 1.0);
  for (int i = 0; i < n; ++i) x[i] = 1.0 + std::exp(lo + (hi - lo) * i / (n - 1));
  x.front() = 1.0 + node_eps;
  x.back() = x_max;
  return Grid(std::move(x));
}

bool Grid::same_as(const Grid& other) const {
  return nodes_ == other.nodes_ || *nodes_ == *other.nodes_;
}

GridFunction::GridFunction(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) throw std::invalid_argument("GridFunction: size mismatch");
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("GridFunction: non-finite value");
  }
}

GridFunction GridFunction::zeros(const Grid& grid) {
  return GridFunction(grid, std::vector<double>(grid.size(), 0.0));
}

double GridFunction::eval(double x) const {
  const auto nodes = grid_.nodes();
  if (x < 1.0 || x > nodes.back()) return 0.0;
  if (x <= nodes.front()) return values_.front();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
  const std::size_t j = static_cast<std::size_t>(it - nodes.begin());
  if (j >= nodes.size()) return values_.back();
  const double t = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
  return values_[j - 1] + t * (values_[j] - values_[j - 1]);
}

double GridFunction::l1_norm() const { return l1_distance(*this, zeros(grid_)); }

GridFunction GridFunction::resample(const Grid& target) const {
  std::vector<double> v(target.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = eval(target[i]);
  return GridFunction(target, std::move(v));
}

double l1_distance(const GridFunction& f, const GridFunction& g) {
  return integrate_difference(f, g, abs_linear);
}

double ise(const GridFunction& f, const GridFunction& g) { return integrate_difference(f, g, sq_linear); }

double ise_samples(std::span<const double> x, std::span<const double> f, std::span<const double> g) {
  if (x.size() != f.size() || x.size() != g.size()) throw std::invalid_argument("ise_samples: size mismatch");
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double a = f[i - 1] - g[i - 1];
    const double b = f[i] - g[i];
    total += 0.5 * (x[i] - x[i - 1]) * (a * a + b * b);
  }
  return total;
}

}  // namespace gfab
