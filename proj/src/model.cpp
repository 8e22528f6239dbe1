#include "gfab/model.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace gfab {

void ModelParams::validate(double mass_tol) const {
  if (!(lambda > 0.0) || !(r > 0.0)) throw std::invalid_argument("ModelParams: lambda and r must be > 0");
  if (!(lambda_lo > 0.0) || !(lambda_lo <= lambda_hi)) {
    throw std::invalid_argument("ModelParams: need 0 < lambda_lo <= lambda_hi");
  }
  if (!g) throw std::invalid_argument("ModelParams: missing loss-fraction density");
  const double mass = total_mass(*g);
  if (std::abs(mass - 1.0) > mass_tol) {
    throw std::invalid_argument("ModelParams: loss-fraction density has mass " + std::to_string(mass));
  }
}

double flow(double x, double t, double r) {
  if (t < 0.0) throw std::invalid_argument("flow: negative time");
  if (x <= 1.0) return x;
  return (x - 1.0) * std::exp(r * t) + 1.0;
}

double inverse_flow_time(double x, double y, double r) {
  if (!(x > 1.0)) throw std::invalid_argument("inverse_flow_time: x must exceed 1");
  if (!(y >= x)) throw std::invalid_argument("inverse_flow_time: target below start");
  return std::log((y - 1.0) / (x - 1.0)) / r;
}

double sample_loss_fraction(const Density& g, Rng& rng) { return g.sample(rng); }

ChainPath simulate_chain(const ModelParams& params, double x0, Rng& rng, ChainOptions options) {
  if (!(x0 > 0.0)) throw std::invalid_argument("simulate_chain: x0 must be > 0");
  if (options.max_jumps < 1) throw std::invalid_argument("simulate_chain: max_jumps must be >= 1");
  ChainPath path;
  path.z0 = x0;
  path.steps.reserve(std::min<std::size_t>(options.max_jumps, 1024));
  double z = x0;
  const bool can_absorb = x0 > 1.0;
  for (std::size_t k = 1; k <= options.max_jumps; ++k) {
    const ChainStep step = chain_step(z, params.lambda, params.r, *params.g, rng);
    path.steps.push_back(step);
    z = step.z;
    if (can_absorb && !path.absorbed_at && z <= 1.0) {
      path.absorbed_at = k;
      if (!options.continue_after_absorption) return path;
    }
  }
  path.truncated = !path.absorbed_at;
  return path;
}

std::string ChainPath::to_csv() const {
  std::ostringstream os;
  char buf[128];
  os << "k,s_k,y_k,z_k\n";
  std::snprintf(buf, sizeof buf, "0,,,%.17g\n", z0);
  os << buf;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k + 1, steps[k].s, steps[k].y, steps[k].z);
    os << buf;
  }
  return os.str();
}

nlohmann::json ChainPath::to_json() const {
  nlohmann::json j;
  j["z0"] = z0;
  auto& arr = j["steps"] = nlohmann::json::array();
  for (const auto& st : steps) arr.push_back({{"s", st.s}, {"y", st.y}, {"z", st.z}});
  j["absorbed_at"] = absorbed_at ? nlohmann::json(*absorbed_at) : nlohmann::json(nullptr);
  j["truncated"] = truncated;
  return j;
}

Trajectory simulate_trajectory(const ModelParams& params, double x0, double horizon, Rng& rng) {
  if (!(horizon > 0.0)) throw std::invalid_argument("simulate_trajectory: horizon must be > 0");
  if (!(x0 > 0.0)) throw std::invalid_argument("simulate_trajectory: x0 must be > 0");
  Trajectory tr;
  tr.x0 = x0;
  tr.r = params.r;
  tr.horizon = horizon;
  double t = 0.0;
  double z = x0;
  for (;;) {
    const ChainStep step = chain_step(z, params.lambda, params.r, *params.g, rng);
    if (t + step.s > horizon) break;
    t += step.s;
    tr.jump_times.push_back(t);
    tr.interarrival.push_back(step.s);
    tr.pre_jump.push_back(flow(z, step.s, params.r));
    tr.post_jump.push_back(step.z);
    z = step.z;
  }
  return tr;
}

double Trajectory::value_at(double t) const {
  double start = 0.0;
  double z = x0;
  for (std::size_t k = 0; k < jump_times.size() && jump_times[k] <= t; ++k) {
    start = jump_times[k];
    z = post_jump[k];
  }
  return flow(z, t - start, r);
}

std::vector<std::pair<double, double>> Trajectory::sample(int points_per_segment) const {
  const int m = std::max(points_per_segment, 2);
  std::vector<std::pair<double, double>> out;
  double start = 0.0;
  double z = x0;
  for (std::size_t k = 0; k <= jump_times.size(); ++k) {
    const double end = k < jump_times.size() ? jump_times[k] : horizon;
    for (int i = 0; i < m; ++i) {
      const double t = start + (end - start) * i / (m - 1);
      // The last point of a closed segment reuses the stored pre-jump state.
      const bool jump_end = i == m - 1 && k < jump_times.size();
      out.emplace_back(t, jump_end ? pre_jump[k] : flow(z, t - start, r));
    }
    if (k < jump_times.size()) {
      out.emplace_back(end, post_jump[k]);
      start = end;
      z = post_jump[k];
    }
  }
  return out;
}

}  // namespace gfab
