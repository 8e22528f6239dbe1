#include "gfab/mc_oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace gfab {

double McReport::freq(int k) const {
  return static_cast<double>(jump_hist.at(k - 1)) / static_cast<double>(n_paths);
}

double McReport::freq_se(int k) const {
  const double f = freq(k);
  return std::sqrt(f * (1.0 - f) / static_cast<double>(n_paths));
}

nlohmann::json McReport::to_json() const {
  return {{"x0", x0},         {"n_paths", n_paths},     {"m_cap", m_cap},
          {"p_hat", p_hat},   {"se", se},               {"jump_hist", jump_hist},
          {"truncated_frac", truncated_frac}};
}

McReport mc_absorption(const ModelParams& params, double x0, int m_cap, std::uint64_t n_paths, Rng& rng,
                       McOptions options) {
  if (!(x0 > 1.0)) throw std::invalid_argument("mc_absorption: x0 must exceed 1");
  if (m_cap < 1 || n_paths < 1) throw std::invalid_argument("mc_absorption: m_cap and n_paths must be >= 1");
  if (options.chunk < 1) options.chunk = 1;
  const std::uint64_t base = rng.next_u64();
  const std::uint64_t chunks = (n_paths + options.chunk - 1) / options.chunk;
  std::vector<std::vector<std::uint64_t>> counts(chunks, std::vector<std::uint64_t>(m_cap, 0));
  const Density& g = *params.g;

  auto run_chunk = [&](std::uint64_t c) {
    Rng local(stream_seed(base, c));
    const std::uint64_t begin = c * options.chunk;
    const std::uint64_t end = std::min(n_paths, begin + options.chunk);
    auto& hist = counts[c];
    for (std::uint64_t p = begin; p < end; ++p) {
      double z = x0;
      for (int k = 0; k < m_cap; ++k) {
        z = chain_step(z, params.lambda, params.r, g, local).z;
        if (z <= 1.0) {
          ++hist[k];
          break;
        }
      }
    }
  };

  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(chunks)));
  if (threads == 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::uint64_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::uint64_t c = next++; c < chunks; c = next++) run_chunk(c);
      });
    }
    for (auto& th : pool) th.join();
  }

  McReport rep;
  rep.x0 = x0;
  rep.n_paths = n_paths;
  rep.m_cap = m_cap;
  rep.jump_hist.assign(m_cap, 0);
  for (const auto& h : counts) {
    for (int k = 0; k < m_cap; ++k) rep.jump_hist[k] += h[k];
  }
  std::uint64_t absorbed = 0;
  for (auto v : rep.jump_hist) absorbed += v;
  const double n = static_cast<double>(n_paths);
  rep.p_hat = static_cast<double>(absorbed) / n;
  rep.se = std::sqrt(rep.p_hat * (1.0 - rep.p_hat) / n);
  rep.truncated_frac = static_cast<double>(n_paths - absorbed) / n;
  return rep;
}

}  // namespace gfab
