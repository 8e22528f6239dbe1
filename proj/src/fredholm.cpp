#include "gfab/fredholm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gfab/estimators.hpp"
#include "gfab/quadrature.hpp"

namespace gfab {

namespace {

std::string contraction_message(double kappa) {
  std::ostringstream os;
  os << "contraction bound " << kappa
     << " >= 1: the Neumann series needs int_0^1 G(u)/u du < 1 + r/lambda";
  return os.str();
}

std::string divergence_message(double value, double eps0) {
  std::ostringstream os;
  os << "int G(u)/u du diverges at 0 (value from " << eps0 << ": " << value << ")";
  return os.str();
}

}  // namespace

ContractionError::ContractionError(double kappa) : std::runtime_error(contraction_message(kappa)), kappa_(kappa) {}

DivergentWeightError::DivergentWeightError(double truncated_value, double eps0)
    : std::runtime_error(divergence_message(truncated_value, eps0)), value_(truncated_value) {}

double contraction_bound(const KernelSpec& spec, double eps0) {
  spec.validate();
  const double pre = spec.lambda / (spec.lambda + spec.r);
  if (const auto* power = dynamic_cast<const PowerDensity*>(spec.g.get())) {
    const double k = power->exponent();
    if (k <= 0.0) throw DivergentWeightError(std::numeric_limits<double>::infinity(), eps0);
    return pre * (k + 1.0) / k;
  }
  const double outer = weighted_l1_diagnostic(*spec.g, nullptr, eps0);
  const double inner = weighted_l1_diagnostic(*spec.g, nullptr, eps0 / 1000.0);
  if (inner - outer > 1e-3 * outer) throw DivergentWeightError(outer, eps0);
  return pre * inner;
}

NystromOperator::NystromOperator(const KernelSpec& spec, const Grid& grid, int gauss_points)
    : grid_(grid), n_(grid.size()), w_(n_ * n_, 0.0) {
  spec.validate();
  const quad::Rule rule = quad::gauss_legendre(gauss_points);
  const auto xs = grid_.nodes();
  std::vector<double> col(n_);
  auto gauss = [&](double a, double b, auto&& sink) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double y = mid + half * rule.nodes[q];
      transition_density_column(spec, y, xs, col);
      sink(y, rule.weights[q] * half);
    }
  };
  gauss(1.0, xs[0], [&](double, double wq) {
    for (std::size_t i = 0; i < n_; ++i) w_[i * n_] += wq * col[i];
  });
  for (std::size_t j = 0; j + 1 < n_; ++j) {
    const double a = xs[j];
    const double b = xs[j + 1];
    gauss(a, b, [&](double y, double wq) {
      const double t = (y - a) / (b - a);
      for (std::size_t i = 0; i < n_; ++i) {
        w_[i * n_ + j] += wq * (1.0 - t) * col[i];
        w_[i * n_ + j + 1] += wq * t * col[i];
      }
    });
  }
}

double NystromOperator::row_mass(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < n_; ++j) s += w_[i * n_ + j];
  return s;
}

GridFunction NystromOperator::apply(const GridFunction& h) const {
  const GridFunction hr = h.grid().same_as(grid_) ? h : h.resample(grid_);
  const auto v = hr.values();
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &w_[i * n_];
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += row[j] * v[j];
    out[i] = s;
  }
  return GridFunction(grid_, std::move(out));
}

GridFunction source_s_adaptive(const KernelSpec& spec, const Grid& grid) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = integrate_row(spec, grid[i], 0.0, 1.0);
  return GridFunction(grid, std::move(v));
}

GridFunction source_s(const KernelSpec& spec, const Grid& grid, int intervals, int points) {
  spec.validate();
  if (!spec.g->breakpoints().empty()) return source_s_adaptive(spec, grid);
  if (intervals < 1) throw std::invalid_argument("source_s: intervals must be >= 1");
  const quad::Rule rule = quad::gauss_legendre(points);
  const auto xs = grid.nodes();
  std::vector<double> v(xs.size(), 0.0);
  std::vector<double> col(xs.size());
  const double half = 0.5 / intervals;
  for (int k = 0; k < intervals; ++k) {
    const double mid = (k + 0.5) / intervals;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      transition_density_column(spec, mid + half * rule.nodes[q], xs, col);
      const double wq = rule.weights[q] * half;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += wq * col[i];
    }
  }
  return GridFunction(grid, std::move(v));
}

nlohmann::json SolverReport::to_json() const {
  return {{"m", m},
          {"kappa", kappa},
          {"s_norm", s_norm},
          {"tail_bound", tail_bound},
          {"truncation_diag", truncation_diag},
          {"quad_tol", quad_tol}};
}

namespace {

double checked_kappa(const KernelSpec& spec) {
  const double k = contraction_bound(spec);
  if (!(k < 1.0)) throw ContractionError(k);
  return k;
}

}  // namespace

FredholmSolver::FredholmSolver(const KernelSpec& spec, const SolverOptions& options)
    : spec_(spec),
      kappa_(checked_kappa(spec)),
      grid_(options.grid()),
      s_(source_s(spec, grid_, options.source_intervals, options.source_points)),
      op_(spec, grid_, options.gauss_points) {}

std::vector<GridFunction> FredholmSolver::hitting(int m_max) const {
  if (m_max < 1) throw std::invalid_argument("hitting: m_max must be >= 1");
  std::vector<GridFunction> t{s_};
  t.reserve(m_max);
  for (int k = 1; k < m_max; ++k) t.push_back(op_.apply(t.back()));
  return t;
}

FredholmSolver::Neumann FredholmSolver::neumann(int m) const {
  if (m < 0) throw std::invalid_argument("neumann: m must be >= 0");
  auto t = hitting(m + 1);
  std::vector<double> p(t.front().values().begin(), t.front().values().end());
  for (std::size_t k = 1; k < t.size(); ++k) {
    const auto v = t[k].values();
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += v[i];
  }
  SolverReport rep;
  rep.m = m;
  rep.kappa = kappa_;
  rep.s_norm = s_.l1_norm();
  rep.tail_bound = rep.s_norm * std::pow(kappa_, m + 1) / (1.0 - kappa_);
  double top = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (grid_[i] >= grid_.x_max() / 10.0) top = std::max(top, std::abs(p[i]));
  }
  rep.truncation_diag = (m + 1) * top;
  rep.quad_tol = spec_.quad_tol;
  return {GridFunction(grid_, std::move(p)), std::move(t), rep};
}

FredholmSolver::Neumann neumann_solve(const KernelSpec& spec, const SolverOptions& options, int m) {
  return FredholmSolver(spec, options).neumann(m);
}

std::vector<GridFunction> hitting_time_probs(const KernelSpec& spec, const SolverOptions& options, int m_max) {
  return FredholmSolver(spec, options).hitting(m_max);
}

}  // namespace gfab
