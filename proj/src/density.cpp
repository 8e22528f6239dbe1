#include "gfab/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "gfab/quadrature.hpp"

namespace gfab {

namespace {

// Bisection for the root of a nondecreasing function on [lo, hi].
template <class F>
double bisect(F&& f, double target, double lo, double hi) {
  for (int i = 0; i < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// ---------------------------------------------------------------- power

PowerDensity::PowerDensity(double exponent) : k_(exponent) {
  if (!(exponent >= 0.0) || !std::isfinite(exponent)) {
    throw std::invalid_argument("PowerDensity: exponent must be finite and >= 0");
  }
}

double PowerDensity::eval(double u) const {
  if (u < 0.0 || u > 1.0) return 0.0;
  return (k_ + 1.0) * std::pow(u, k_);
}

double PowerDensity::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return std::pow(u, k_ + 1.0);
}

double PowerDensity::cdf_inverse(double q) const {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  return std::pow(q, 1.0 / (k_ + 1.0));
}

double PowerDensity::sup() const { return k_ + 1.0; }

std::string PowerDensity::describe() const {
  std::ostringstream os;
  os << "power(k=" << k_ << ")";
  return os.str();
}

DensityPtr make_power_density(double exponent) {
  return std::make_shared<PowerDensity>(exponent);
}

// ------------------------------------------------------------- callable

CallableDensity::CallableDensity(std::function<double(double)> pdf, std::vector<double> breakpoints,
                                 std::string name, int table_cells)
    : pdf_(std::move(pdf)), breaks_(std::move(breakpoints)), name_(std::move(name)) {
  if (!pdf_) throw std::invalid_argument("CallableDensity: empty callable");
  if (table_cells < 1) throw std::invalid_argument("CallableDensity: table needs cells");
  std::sort(breaks_.begin(), breaks_.end());
  table_.assign(table_cells + 1, 0.0);
  for (int i = 0; i < table_cells; ++i) {
    const double a = static_cast<double>(i) / table_cells;
    const double b = static_cast<double>(i + 1) / table_cells;
    table_[i + 1] = table_[i] + cell_integral(a, b);
    for (int j = 0; j <= 4; ++j) sup_ = std::max(sup_, eval(a + (b - a) * j / 4.0));
  }
  for (double u : breaks_) {
    sup_ = std::max({sup_, eval(u), eval(std::nextafter(u, 0.0)), eval(std::nextafter(u, 1.0))});
  }
}

double CallableDensity::eval(double u) const {
  if (u < 0.0 || u > 1.0) return 0.0;
  return std::max(0.0, pdf_(u));
}

double CallableDensity::cell_integral(double a, double b) const {
  static const quad::Rule rule = quad::gauss_legendre(8);
  // Split at any breakpoint inside the cell so each piece is smooth.
  std::vector<double> pts{a};
  for (double u : breaks_) {
    if (u > a && u < b) pts.push_back(u);
  }
  pts.push_back(b);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
    const double c = 0.5 * (pts[p] + pts[p + 1]);
    const double h = 0.5 * (pts[p + 1] - pts[p]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      sum += rule.weights[k] * h * eval(c + h * rule.nodes[k]);
    }
  }
  return sum;
}

double CallableDensity::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return table_.back();
  const int cells = static_cast<int>(table_.size()) - 1;
  const int i = std::min(cells - 1, static_cast<int>(u * cells));
  const double a = static_cast<double>(i) / cells;
  return table_[i] + cell_integral(a, u);
}

double CallableDensity::cdf_inverse(double q) const {
  const double mass = table_.back();
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  const double target = q * mass;
  const auto it = std::upper_bound(table_.begin(), table_.end(), target);
  const int cells = static_cast<int>(table_.size()) - 1;
  const int i = std::clamp(static_cast<int>(it - table_.begin()) - 1, 0, cells - 1);
  const double a = static_cast<double>(i) / cells;
  const double b = static_cast<double>(i + 1) / cells;
  return bisect([&](double u) { return table_[i] + cell_integral(a, u); }, target, a, b);
}

// ------------------------------------------------------------ tabulated

TabulatedDensity::TabulatedDensity(std::vector<double> values, std::vector<double> slopes,
                                   std::string name)
    : values_(std::move(values)), slopes_(std::move(slopes)), name_(std::move(name)) {
  if (values_.size() < 2 || values_.size() != slopes_.size()) {
    throw std::invalid_argument("TabulatedDensity: need >= 2 nodes with matching slopes");
  }
  step_ = 1.0 / static_cast<double>(values_.size() - 1);
  cumulative_.assign(values_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + partial_cell(i, 1.0);
    for (int j = 0; j <= 4; ++j) sup_ = std::max(sup_, eval((i + j / 4.0) * step_));
  }
}

double TabulatedDensity::eval(double u) const {
  if (u < 0.0 || u > 1.0) return 0.0;
  const std::size_t cells = values_.size() - 1;
  const std::size_t i = std::min(cells - 1, static_cast<std::size_t>(u / step_));
  const double t = (u - static_cast<double>(i) * step_) / step_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double v = (2 * t3 - 3 * t2 + 1) * values_[i] + (t3 - 2 * t2 + t) * step_ * slopes_[i] +
                   (-2 * t3 + 3 * t2) * values_[i + 1] + (t3 - t2) * step_ * slopes_[i + 1];
  return std::max(0.0, v);
}

double TabulatedDensity::partial_cell(std::size_t i, double t) const {
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double t4 = t3 * t;
  const double h = step_;
  return h * ((t4 / 2 - t3 + t) * values_[i] + (t4 / 4 - 2 * t3 / 3 + t2 / 2) * h * slopes_[i] +
              (-t4 / 2 + t3) * values_[i + 1] + (t4 / 4 - t3 / 3) * h * slopes_[i + 1]);
}

double TabulatedDensity::cdf(double u) const {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return cumulative_.back();
  const std::size_t cells = values_.size() - 1;
  const std::size_t i = std::min(cells - 1, static_cast<std::size_t>(u / step_));
  return cumulative_[i] + partial_cell(i, (u - static_cast<double>(i) * step_) / step_);
}

double TabulatedDensity::cdf_inverse(double q) const {
  if (q <= 0.0) return 0.0;
  if (q >= 1.0) return 1.0;
  const double target = q * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t cells = values_.size() - 1;
  const std::size_t i = std::min<std::size_t>(
      cells - 1, static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cumulative_.begin() - 1)));
  const double t = bisect([&](double s) { return cumulative_[i] + partial_cell(i, s); }, target, 0.0, 1.0);
  return (static_cast<double>(i) + t) * step_;
}

std::shared_ptr<const TabulatedDensity> tabulate_density(const std::function<double(double)>& pdf,
                                                         const std::function<double(double)>& dpdf,
                                                         int nodes, std::string name) {
  if (nodes < 2) throw std::invalid_argument("tabulate_density: need >= 2 nodes");
  std::vector<double> v(nodes), d(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double u = static_cast<double>(i) / (nodes - 1);
    v[i] = pdf(u);
    d[i] = dpdf(u);
  }
  return std::make_shared<TabulatedDensity>(std::move(v), std::move(d), std::move(name));
}

double total_mass(const Density& g, double rel_tol) {
  std::vector<double> breaks{0.0};
  for (double u : g.breakpoints()) {
    if (u > 0.0 && u < 1.0) breaks.push_back(u);
  }
  breaks.push_back(1.0);
  return quad::integrate_pieces([&](double u) { return g.eval(u); }, breaks, {rel_tol, 1e-15})
      .value;
}

}  // namespace gfab
