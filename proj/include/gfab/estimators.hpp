#pragma once

#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "gfab/density.hpp"

namespace gfab {

/// Truncated maximum-likelihood estimate of the jump rate.
struct LambdaEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
  double raw = 0.0;  // 1 / mean interarrival time, before clamping
};

/// value = clamp(n / sum(s), lo, hi).
LambdaEstimate estimate_lambda_tmle(std::span<const double> s, double lo, double hi);

/// Rule-of-thumb bandwidth 0.9 min(sd, IQR / 1.34) n^(-1/5). If the IQR is
/// zero but the sample is not constant, the standard deviation is used alone.
double bandwidth_silverman(std::span<const double> y);

/// Gaussian-kernel Parzen-Rosenblatt estimate of the loss-fraction density.
class KdeEstimate {
 public:
  KdeEstimate(std::vector<double> samples, double bandwidth);

  /// Fits with the Silverman bandwidth.
  static KdeEstimate fit(std::span<const double> samples);

  /// (1 / (n h)) sum_i phi((y_i - x) / h), on the whole real line.
  double eval(double x) const;
  double derivative(double x) const;
  /// Mass of (-inf, x].
  double cdf(double x) const;

  double bandwidth() const { return h_; }
  std::span<const double> samples() const { return samples_; }

  /// View on [0, 1] evaluating the kernel sum exactly (zero outside [0, 1]);
  /// mass leaking past the ends is not renormalised.
  DensityPtr exact_density() const;
  /// Cubic Hermite table of the same view on `nodes` points; the form used
  /// inside the Fredholm pipeline.
  DensityPtr tabulated_density(int nodes) const;

 private:
  std::vector<double> samples_;
  double h_;
};

/// Sup over `grid` of |g - g_hat|.
double sup_norm_diagnostic(const Density& g_hat, const Density& g, std::span<const double> grid);

/// Integral over [eps0, 1] of |g - g_hat| / u; with g == nullptr, the
/// integral of g_hat / u.
double weighted_l1_diagnostic(const Density& g_hat, const Density* g, double eps0 = 1e-6);

/// Estimator report: {lambda_hat, raw, bandwidth, sup_norm, weighted_l1, n}.
struct EstimatorReport {
  LambdaEstimate lambda;
  double bandwidth = 0.0;
  double sup_norm = 0.0;
  double weighted_l1 = 0.0;

  nlohmann::json to_json() const;
};

/// Uniform grid of `points` values on [0, 1].
std::vector<double> unit_grid(int points);

}  // namespace gfab
