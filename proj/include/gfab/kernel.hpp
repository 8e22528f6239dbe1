#pragma once

#include <span>

#include "gfab/density.hpp"

namespace gfab {

/// Parameters of the post-jump transition density R(x, y). The exact kernel
/// and its plug-in estimate are both KernelSpecs; only (lambda, g) differ.
struct KernelSpec {
  double lambda = 1.0;
  double r = 1.0;
  DensityPtr g;
  double quad_tol = 1e-8;

  double ratio() const { return lambda / r; }
  void validate() const;
  /// Same kernel with a different relative quadrature tolerance.
  KernelSpec with_tol(double tol) const;
};

/// Inner integral of the transition density for x > 1:
///   int_0^{min(y/x, 1)} G(u) u^a (y - u)^(-a-1) du,  a = lambda / r.
///
/// Evaluated in w = u / (y - u), where the integrand becomes
/// G(y w / (1 + w)) w^a / (1 + w) on [0, W], W = 1 / (max(x, y) - 1). The
/// part above w = 1 is integrated in log w.
double beta_integral(const KernelSpec& spec, double x, double y);

/// R(x, y): (1/x) G(y/x) for x <= 1, (lambda/r)(x-1)^(lambda/r) beta_integral
/// otherwise.
double transition_density(const KernelSpec& spec, double x, double y);

/// alpha_lambda(x) int_0^{min(y/x,1)} u^a (y-u)^(-a-1) du with
/// alpha_lambda(x) = (x-1)^a / r; bounded by 1/lambda.
double f_lambda(double lambda, double r, double x, double y, double quad_tol = 1e-10);

/// ((x-1)/(y_max-1))^(lambda/r): probability that the flow alone carries x
/// past y_max before the next jump, hence an upper bound on the kernel mass
/// above y_max.
double tail_mass_bound(double x, double y_max, double lambda, double r);

/// Uniform bound on |R - R_hat| over [1, inf) x [0, inf):
///   sup|G - G_hat| + (1/lo)(4 e^-1 hi/lo + 1) sup|G_hat| |lambda - lambda_hat|.
double sup_error_bound(double sup_g_err, double sup_g_hat, double lambda_err, double lambda_lo,
                       double lambda_hi);

/// Bound on sup_y int_1^inf |R - R_hat| dx from the weighted L1 distance of
/// the densities and the rate error.
double column_l1_bound(double weighted_l1_diff, double weighted_g_hat, double lambda, double lambda_hat,
                       double r, double lambda_lo, double lambda_hi);

/// R(x_i, y) for every x_i in `xs` (ascending, all > 1) at a fixed y, in one
/// cumulative sweep over w: for x > y the inner upper limit is
/// W = 1/(x-1) and for x <= y it is 1/(y-1), so one pass collects all rows.
void transition_density_column(const KernelSpec& spec, double y, std::span<const double> xs,
                               std::span<double> out);

/// int_{y0}^{y1} R(x, y) dy by adaptive quadrature on the pointwise kernel.
double integrate_row(const KernelSpec& spec, double x, double y0, double y1);

/// int_1^inf R(x, y) dx.
double integrate_column(const KernelSpec& spec, double y);

/// int_1^inf |R(x, y) - R_hat(x, y)| dx.
double column_l1_difference(const KernelSpec& exact, const KernelSpec& estimate, double y);

}  // namespace gfab
