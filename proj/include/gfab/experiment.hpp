#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gfab/estimators.hpp"
#include "gfab/fredholm.hpp"
#include "gfab/model.hpp"

namespace gfab {

/// Everything a replicate sweep depends on. Stored as a flat key = value
/// file; see README for the grammar.
struct ExperimentConfig {
  // model
  double lambda = 1.0;
  double r = 1.0;
  double g_exponent = 10.0;
  double lambda_lo = 0.5;
  double lambda_hi = 2.0;
  // sweep
  std::vector<int> ns{50, 75, 100};
  int replicates = 100;
  int m = 10;
  int m_hit = 6;
  int t_ise_max = 4;
  double x_eval = 1.1;
  // figure samples
  double kernel_anchor = 2.0;
  double kernel_lo = 1.0;
  double kernel_hi = 4.0;
  int kernel_points = 121;
  double p_lo = 1.0;
  double p_hi = 3.0;
  int p_points = 101;
  int trajectories = 2;
  double trajectory_x0 = 1.1;
  double trajectory_horizon = 10.0;
  int trajectory_points = 20;
  // numerics
  int grid_size = 400;
  double node_eps = 1e-4;
  double x_max = 1000.0;
  int gauss_points = 4;
  double quad_tol = 1e-8;
  int kde_nodes = 2049;
  int sup_grid = 1001;
  double eps0 = 1e-6;
  // execution
  std::uint64_t global_seed = 1;
  int threads = 0;  // 0: hardware concurrency

  ModelParams model() const;
  SolverOptions solver_options() const;
  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;

  /// Applies `key = value` lines; '#' starts a comment. Unknown keys throw.
  void apply(const std::string& text);
  void set(const std::string& key, const std::string& value);
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& file);
  std::string serialize() const;
};

/// Exact curves every replicate is compared against.
struct Reference {
  std::vector<double> kernel_args;
  std::vector<double> kernel_x2;  // R(x, anchor)
  std::vector<double> kernel_2y;  // R(anchor, y)
  std::vector<double> p_args;
  std::vector<double> p_curve;    // p_m on p_args
  std::vector<double> t_at_x;     // t_1..t_{m_hit} at x_eval
  std::optional<GridFunction> p;
  std::vector<GridFunction> t;
  SolverReport report;
};

struct ReplicateRecord {
  int n = 0;
  int replicate = 0;
  /// "ok", "refused" (contraction bound of the estimate >= 1 or divergent
  /// weight) or "failed".
  std::string status = "ok";
  std::string reason;
  EstimatorReport estimator;
  double kappa_hat = 0.0;
  bool has_kappa = false;
  std::vector<double> kernel_x2_hat;
  std::vector<double> kernel_2y_hat;
  double ise_kernel_x2 = 0.0;
  double ise_kernel_2y = 0.0;
  // Solver outputs, filled when status == "ok".
  std::vector<double> p_hat;
  double ise_p = 0.0;
  std::vector<double> ise_t;   // m = 1..t_ise_max
  std::vector<double> t_at_x;  // m = 1..m_hit
};

struct ReplicateTable {
  ExperimentConfig config;
  Reference reference;
  std::vector<Trajectory> trajectories;
  /// Ordered by (n index, replicate).
  std::vector<ReplicateRecord> rows;
};

Reference compute_reference(const ExperimentConfig& cfg);

/// One (n, replicate) cell given the first n pairs.
ReplicateRecord run_one(const ExperimentConfig& cfg, const Reference& ref, int n, int replicate,
                        std::span<const double> s, std::span<const double> y);

/// The full sweep. Replicate i draws max(ns) pairs from its own stream and
/// every n uses a prefix of them. Workers pick replicates off a counter and
/// results are stored by index.
ReplicateTable run_replicates(const ExperimentConfig& cfg);

/// Writes trajectories.csv, kernel_curves.csv, kernel_ise.csv, p_curves.csv,
/// p_ise.csv, t_ise.csv, t_dist.csv and replicates.csv into `outdir`.
void emit_figures(const ReplicateTable& table, const std::filesystem::path& outdir);

/// Median of the finite entries (NaN when none).
double median(std::vector<double> v);
/// Type-7 sample quantile.
double quantile(std::vector<double> v, double q);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace gfab
