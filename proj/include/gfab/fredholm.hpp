#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gfab/grid.hpp"
#include "gfab/kernel.hpp"

namespace gfab {

/// Raised when the contraction bound is not below one: the Neumann series is
/// only summed under int_0^1 G(u)/u du < 1 + r/lambda.
class ContractionError : public std::runtime_error {
 public:
  explicit ContractionError(double kappa);
  double kappa() const { return kappa_; }

 private:
  double kappa_;
};

/// Raised when int G(u)/u du does not settle as its lower cutoff shrinks.
class DivergentWeightError : public std::runtime_error {
 public:
  DivergentWeightError(double truncated_value, double eps0);
  double truncated_value() const { return value_; }

 private:
  double value_;
};

/// kappa = lambda / (lambda + r) int_0^1 G(u)/u du. Closed form for the power
/// family; otherwise the integral is taken from eps0 and compared with the
/// one from eps0 / 1000 to detect divergence.
double contraction_bound(const KernelSpec& spec, double eps0 = 1e-6);

struct SolverOptions {
  int grid_size = 400;
  double node_eps = 1e-4;
  double x_max = 1000.0;
  /// Gauss points per grid interval in the operator weights.
  int gauss_points = 4;
  /// Uniform sub-intervals of [0, 1] for the source term.
  int source_intervals = 32;
  /// Gauss points per source sub-interval.
  int source_points = 8;

  Grid grid() const { return Grid::log_spaced(grid_size, node_eps, x_max); }
};

/// Discretised operator (K h)(x_i) = sum_j W_ij h(x_j), with
/// W_ij = int phi_j(y) R(x_i, y) dy over [1, x_max] and phi_j the hat
/// functions of the grid (phi_0 extended flat down to 1). The matrix is the
/// kernel memo: every R evaluation happens once, while it is built.
class NystromOperator {
 public:
  NystromOperator(const KernelSpec& spec, const Grid& grid, int gauss_points = 4);

  const Grid& grid() const { return grid_; }
  double weight(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }
  /// sum_j W_ij: the kernel mass landing in [1, x_max] from x_i.
  double row_mass(std::size_t i) const;
  GridFunction apply(const GridFunction& h) const;

 private:
  Grid grid_;
  std::size_t n_;
  std::vector<double> w_;
};

/// s(x_i) = int_0^1 R(x_i, y) dy. Smooth densities use a composite Gauss rule
/// in y evaluated by column sweeps; densities with break points fall back to
/// adaptive quadrature per node.
GridFunction source_s(const KernelSpec& spec, const Grid& grid, int intervals = 32, int points = 8);

/// s by adaptive quadrature at every node.
GridFunction source_s_adaptive(const KernelSpec& spec, const Grid& grid);

struct SolverReport {
  int m = 0;
  double kappa = 0.0;
  double s_norm = 0.0;
  double tail_bound = 0.0;
  /// (m + 1) max p_m over [x_max / 10, x_max]: the mass the iterates carry
  /// near the cut, as an estimate of what the zero extension drops.
  double truncation_diag = 0.0;
  double quad_tol = 0.0;

  nlohmann::json to_json() const;
};

/// Builds s and the operator once; the Neumann sums and hitting-time
/// recursions then reuse them.
class FredholmSolver {
 public:
  /// Throws ContractionError when kappa >= 1, before any kernel work.
  FredholmSolver(const KernelSpec& spec, const SolverOptions& options = {});

  double kappa() const { return kappa_; }
  const Grid& grid() const { return grid_; }
  const GridFunction& s() const { return s_; }
  const NystromOperator& op() const { return op_; }

  /// t_1 = s, t_k = K t_{k-1}, k = 1..m_max.
  std::vector<GridFunction> hitting(int m_max) const;

  struct Neumann {
    GridFunction p;                  // sum_{k=0}^m K^k s
    std::vector<GridFunction> t;     // t_1..t_{m+1}
    SolverReport report;
  };
  /// p_m accumulated as t_1 + t_2 + ... + t_{m+1}, left to right.
  Neumann neumann(int m) const;

 private:
  KernelSpec spec_;
  double kappa_;
  Grid grid_;
  GridFunction s_;
  NystromOperator op_;
};

/// One-shot forms.
FredholmSolver::Neumann neumann_solve(const KernelSpec& spec, const SolverOptions& options, int m);
std::vector<GridFunction> hitting_time_probs(const KernelSpec& spec, const SolverOptions& options, int m_max);

}  // namespace gfab
