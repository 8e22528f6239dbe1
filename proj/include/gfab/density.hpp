#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gfab/rng.hpp"

namespace gfab {

/// A probability density on [0, 1]: the loss-fraction law G and every
/// estimate of it go through this interface.
///
/// eval() is zero outside [0, 1]. cdf(u) is the mass of [0, u]; for an
/// estimated density the total mass on [0, 1] may fall short of one, in which
/// case cdf_inverse() and sample() use the normalised CDF.
class Density {
 public:
  virtual ~Density() = default;

  virtual double eval(double u) const = 0;
  virtual double cdf(double u) const = 0;
  virtual double cdf_inverse(double q) const = 0;
  /// Upper bound of eval() on [0, 1].
  virtual double sup() const = 0;
  /// Points of [0, 1] where eval() is not smooth (jumps, kinks).
  virtual std::vector<double> breakpoints() const { return {}; }
  virtual std::string describe() const = 0;

  double sample(Rng& rng) const { return cdf_inverse(rng.uniform()); }
};

using DensityPtr = std::shared_ptr<const Density>;

/// (k + 1) u^k on [0, 1]; k = 10 is the reference loss law.
class PowerDensity final : public Density {
 public:
  explicit PowerDensity(double exponent);

  double exponent() const { return k_; }
  double eval(double u) const override;
  double cdf(double u) const override;
  double cdf_inverse(double q) const override;
  double sup() const override;
  std::string describe() const override;

 private:
  double k_;
};

/// Density given by a callable on [0, 1].
///
/// The CDF is cached on a uniform table (4096 cells by default, each
/// integrated with an 8-point Gauss rule); inversion bisects the table and
/// then the in-cell CDF.
class CallableDensity final : public Density {
 public:
  CallableDensity(std::function<double(double)> pdf, std::vector<double> breakpoints = {},
                  std::string name = "callable", int table_cells = 4096);

  double eval(double u) const override;
  double cdf(double u) const override;
  double cdf_inverse(double q) const override;
  double sup() const override { return sup_; }
  std::vector<double> breakpoints() const override { return breaks_; }
  std::string describe() const override { return name_; }

 private:
  double cell_integral(double a, double b) const;

  std::function<double(double)> pdf_;
  std::vector<double> breaks_;
  std::string name_;
  std::vector<double> table_;  // cumulative mass at i / cells
  double sup_ = 0.0;
};

/// Piecewise cubic Hermite density on a uniform grid of [0, 1].
///
/// Values and slopes are given at the nodes; the CDF integrates the cubic
/// exactly, so cdf(1) is the exact mass of the interpolant.
class TabulatedDensity final : public Density {
 public:
  TabulatedDensity(std::vector<double> values, std::vector<double> slopes,
                   std::string name = "tabulated");

  double eval(double u) const override;
  double cdf(double u) const override;
  double cdf_inverse(double q) const override;
  double sup() const override { return sup_; }
  std::string describe() const override { return name_; }
  std::size_t nodes() const { return values_.size(); }

 private:
  double partial_cell(std::size_t cell, double t) const;

  std::vector<double> values_;
  std::vector<double> slopes_;
  std::string name_;
  std::vector<double> cumulative_;
  double step_;
  double sup_ = 0.0;
};

DensityPtr make_power_density(double exponent);

/// Builds a Hermite table of `pdf` (with derivative `dpdf`) on `nodes` points.
std::shared_ptr<const TabulatedDensity> tabulate_density(const std::function<double(double)>& pdf,
                                                         const std::function<double(double)>& dpdf,
                                                         int nodes, std::string name);

/// Integral of the density over [0, 1] by adaptive quadrature split at the
/// breakpoints.
double total_mass(const Density& g, double rel_tol = 1e-12);

}  // namespace gfab
