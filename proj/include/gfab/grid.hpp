#pragma once

#include <memory>
#include <span>
#include <vector>

namespace gfab {

/// Strictly increasing states on (1, X_max], log-spaced in x - 1 so the
/// spacing shrinks towards 1.
class Grid {
 public:
  explicit Grid(std::vector<double> nodes);

  /// n nodes with x_0 = 1 + node_eps and x_{n-1} = x_max.
  static Grid log_spaced(int n, double node_eps, double x_max);

  std::span<const double> nodes() const { return *nodes_; }
  std::size_t size() const { return nodes_->size(); }
  double operator[](std::size_t i) const { return (*nodes_)[i]; }
  double x_max() const { return nodes_->back(); }

  bool same_as(const Grid& other) const;

 private:
  std::shared_ptr<const std::vector<double>> nodes_;
};

/// Piecewise linear function on a Grid. On [1, x_0] it takes the value at
/// x_0, beyond x_max it is zero.
class GridFunction {
 public:
  GridFunction(Grid grid, std::vector<double> values);
  static GridFunction zeros(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double eval(double x) const;
  /// Exact integral of |f| over [1, x_max].
  double l1_norm() const;
  /// Same function resampled on another grid.
  GridFunction resample(const Grid& target) const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// int_1^{x_max} |f - g| and int_1^{x_max} (f - g)^2 for the interpolants;
/// g is resampled on f's grid when the grids differ.
double l1_distance(const GridFunction& f, const GridFunction& g);
double ise(const GridFunction& f, const GridFunction& g);

/// Same metrics for curves sampled at common abscissae (trapezoid rule).
double ise_samples(std::span<const double> x, std::span<const double> f, std::span<const double> g);

}  // namespace gfab
