#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gfab/density.hpp"
#include "gfab/rng.hpp"

namespace gfab {

/// Jump rate, growth rate, loss-fraction density and the truncation bounds
/// used by the rate estimator.
struct ModelParams {
  double lambda = 1.0;
  double r = 1.0;
  DensityPtr g = make_power_density(10.0);
  double lambda_lo = 0.5;
  double lambda_hi = 2.0;

  /// Throws std::invalid_argument when a field is out of range or g does not
  /// integrate to one within `mass_tol`.
  void validate(double mass_tol = 1e-6) const;
};

/// Deterministic motion: exponential growth above 1, frozen at or below 1.
double flow(double x, double t, double r);

/// Time the flow needs to carry x > 1 up to y >= x.
double inverse_flow_time(double x, double y, double r);

double sample_loss_fraction(const Density& g, Rng& rng);

struct ChainStep {
  double s;  // interarrival time
  double y;  // loss fraction
  double z;  // post-jump state
};

/// One realisation of the post-jump chain.
struct ChainPath {
  double z0 = 0.0;
  std::vector<ChainStep> steps;
  /// First k >= 1 with z_k <= 1, when z0 > 1.
  std::optional<std::size_t> absorbed_at;
  bool truncated = false;

  std::string to_csv() const;
  nlohmann::json to_json() const;
};

struct ChainOptions {
  std::size_t max_jumps = 10000;
  /// Keep jumping inside [0, 1] after absorption (the observation scheme
  /// where loss events stay visible).
  bool continue_after_absorption = false;
};

/// Advances the chain by one jump. Exposed so the Monte-Carlo oracle and the
/// path simulator share arithmetic.
inline ChainStep chain_step(double z, double lambda, double r, const Density& g, Rng& rng) {
  const double s = rng.exponential(lambda);
  const double y = sample_loss_fraction(g, rng);
  return {s, y, flow(z, s, r) * y};
}

ChainPath simulate_chain(const ModelParams& params, double x0, Rng& rng, ChainOptions options = {});

/// Continuous-time path on [0, horizon].
struct Trajectory {
  double x0 = 0.0;
  double r = 1.0;
  double horizon = 0.0;
  std::vector<double> jump_times;
  std::vector<double> interarrival;
  std::vector<double> pre_jump;   // X(T_k-)
  std::vector<double> post_jump;  // X(T_k) = Z_k

  double value_at(double t) const;
  /// (t, x) samples: every segment gets `points_per_segment` points plus the
  /// jump itself (two rows with equal t).
  std::vector<std::pair<double, double>> sample(int points_per_segment) const;
};

Trajectory simulate_trajectory(const ModelParams& params, double x0, double horizon, Rng& rng);

}  // namespace gfab
