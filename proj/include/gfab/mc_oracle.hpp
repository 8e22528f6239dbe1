#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "gfab/model.hpp"
#include "gfab/rng.hpp"

namespace gfab {

/// Monte-Carlo absorption statistics from one starting state.
struct McReport {
  double x0 = 0.0;
  std::uint64_t n_paths = 0;
  int m_cap = 0;
  double p_hat = 0.0;  // absorbed within m_cap jumps
  double se = 0.0;     // sqrt(p_hat (1 - p_hat) / n_paths)
  std::vector<std::uint64_t> jump_hist;  // jump_hist[k - 1]: absorbed exactly at jump k
  double truncated_frac = 0.0;

  /// jump_hist[k - 1] / n_paths and its binomial standard error.
  double freq(int k) const;
  double freq_se(int k) const;

  nlohmann::json to_json() const;
};

struct McOptions {
  std::uint64_t chunk = 1u << 16;
  unsigned threads = 1;
};

/// Simulates n_paths chains from x0 and records the first jump landing in
/// [0, 1]. Paths are split into chunks, each with its own stream derived from
/// one draw of `rng`; counts are merged by chunk index, so the result does not
/// depend on the thread count.
McReport mc_absorption(const ModelParams& params, double x0, int m_cap, std::uint64_t n_paths, Rng& rng,
                       McOptions options = {});

}  // namespace gfab
