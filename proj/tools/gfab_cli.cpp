#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gfab/estimators.hpp"
#include "gfab/experiment.hpp"
#include "gfab/fredholm.hpp"
#include "gfab/kernel.hpp"
#include "gfab/mc_oracle.hpp"
#include "gfab/model.hpp"
#include "gfab/quadrature.hpp"

namespace fs = std::filesystem;
using namespace gfab;

namespace {

// Bad input from the command line or the file system: exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Stream tags, so subcommands sharing a seed draw independent numbers.
enum Stream : std::uint64_t { kSimulate = 101, kData = 102, kValidate = 103 };

struct Pairs {
  std::vector<double> s, y;
};

Pairs read_pairs(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw UsageError("cannot read " + file.string());
  Pairs p;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b)) {
      throw UsageError(file.string() + ":" + std::to_string(lineno) + ": expected s,y");
    }
    char* end = nullptr;
    const double s = std::strtod(a.c_str(), &end);
    if (end == a.c_str()) {
      if (lineno == 1) continue;  // header
      throw UsageError(file.string() + ":" + std::to_string(lineno) + ": not a number");
    }
    p.s.push_back(s);
    p.y.push_back(std::strtod(b.c_str(), nullptr));
  }
  if (p.s.empty()) throw UsageError(file.string() + ": no data rows");
  return p;
}

Pairs draw_pairs(const ModelParams& model, int n, std::uint64_t seed) {
  Rng rng(stream_seed(seed, kData));
  Pairs p;
  for (int k = 0; k < n; ++k) {
    p.s.push_back(rng.exponential(model.lambda));
    p.y.push_back(sample_loss_fraction(*model.g, rng));
  }
  return p;
}

void write_file(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw UsageError("cannot write " + file.string());
  out << text;
}

void emit_json(const fs::path& file, const nlohmann::json& j) {
  write_file(file, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
}

// Data source options shared by estimate, kernel, solve and hitting.
struct DataSource {
  std::string file;
  int n = 0;
};

void add_data_options(CLI::App* cmd, DataSource& src, int default_n) {
  src.n = default_n;
  cmd->add_option("--data", src.file, "CSV of (s, y) pairs");
  cmd->add_option("--n", src.n, "number of simulated pairs when --data is absent")->check(CLI::PositiveNumber);
}

struct Fit {
  EstimatorReport report;
  KernelSpec spec;
};

Fit fit_pairs(const ExperimentConfig& cfg, const Pairs& p) {
  const ModelParams model = cfg.model();
  Fit f;
  f.report.lambda = estimate_lambda_tmle(p.s, cfg.lambda_lo, cfg.lambda_hi);
  const auto kde = KdeEstimate::fit(p.y);
  const auto exact_hat = kde.exact_density();
  f.report.bandwidth = kde.bandwidth();
  f.report.sup_norm = sup_norm_diagnostic(*exact_hat, *model.g, unit_grid(cfg.sup_grid));
  f.report.weighted_l1 = weighted_l1_diagnostic(*exact_hat, model.g.get(), cfg.eps0);
  f.spec = KernelSpec{f.report.lambda.value, model.r, kde.tabulated_density(cfg.kde_nodes), cfg.quad_tol};
  return f;
}

Pairs load_or_draw(const DataSource& src, const ExperimentConfig& cfg) {
  return src.file.empty() ? draw_pairs(cfg.model(), src.n, cfg.global_seed) : read_pairs(src.file);
}

KernelSpec exact_spec(const ExperimentConfig& cfg) {
  const ModelParams model = cfg.model();
  return KernelSpec{model.lambda, model.r, model.g, cfg.quad_tol};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Absorption probability and hitting times of a growth-fragmentation process"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_file;
  std::string out_dir = ".";
  double quad_tol = 0.0;
  int grid_size = 0;
  double xmax = 0.0;
  std::vector<std::string> sets;
  auto* seed_opt = app.add_option("--seed", seed, "global seed");
  app.add_option("--config", config_file, "key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  auto* tol_opt = app.add_option("--quad-tol", quad_tol, "relative quadrature tolerance")->check(CLI::PositiveNumber);
  auto* grid_opt = app.add_option("--grid-size", grid_size, "solver grid nodes")->check(CLI::Range(2, 1 << 20));
  auto* xmax_opt = app.add_option("--xmax", xmax, "upper end of the solver domain");
  app.add_option("--set", sets, "config override key=value (repeatable)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate the post-jump chain, a trajectory or (s, y) pairs");
  double sim_x0 = 1.1;
  std::size_t max_jumps = 10000;
  bool keep_going = false;
  double horizon = 0.0;
  int pairs_n = 0;
  sim->add_option("--x0", sim_x0, "initial state")->check(CLI::PositiveNumber);
  sim->add_option("--max-jumps", max_jumps, "jump cap")->check(CLI::PositiveNumber);
  sim->add_flag("--continue-after-absorption", keep_going, "keep jumping inside [0, 1]");
  sim->add_option("--horizon", horizon, "emit a continuous-time trajectory on [0, horizon]");
  sim->add_option("--pairs", pairs_n, "emit this many (s, y) pairs from the product law");

  // estimate
  auto* est = app.add_subcommand("estimate", "fit lambda_hat and the kernel density estimate");
  DataSource est_src;
  add_data_options(est, est_src, 100);

  // kernel
  auto* ker = app.add_subcommand("kernel", "exact and estimated transition density on a grid");
  DataSource ker_src;
  add_data_options(ker, ker_src, 100);
  double k_lo = 1.0, k_hi = 4.0;
  int k_points = 61;
  ker->add_option("--lo", k_lo, "lower end of both axes");
  ker->add_option("--hi", k_hi, "upper end of both axes");
  ker->add_option("--points", k_points, "points per axis")->check(CLI::Range(2, 100000));

  // solve
  auto* sol = app.add_subcommand("solve", "absorption probability by Neumann partial sums");
  DataSource sol_src;
  std::optional<int> sol_m;
  sol->add_option("--data", sol_src.file, "CSV of (s, y) pairs");
  sol->add_option("--n", sol_src.n, "simulate this many pairs and use the estimated kernel");
  sol->add_option("--m", sol_m, "Neumann iterations (default from config)")->check(CLI::NonNegativeNumber);

  // hitting
  auto* hit = app.add_subcommand("hitting", "hitting-time probabilities t_1..t_m");
  DataSource hit_src;
  std::optional<int> hit_m;
  hit->add_option("--data", hit_src.file, "CSV of (s, y) pairs");
  hit->add_option("--n", hit_src.n, "simulate this many pairs and use the estimated kernel");
  hit->add_option("--m-max", hit_m, "number of hitting indices (default from config)")->check(CLI::PositiveNumber);

  // validate
  auto* val = app.add_subcommand("validate", "Monte-Carlo check of the exact solver");
  std::vector<double> val_x0{1.1, 1.5, 2.0, 3.0};
  std::uint64_t paths = 1000000;
  std::optional<int> m_cap;
  unsigned threads = 1;
  val->add_option("--x0", val_x0, "starting states (> 1)");
  val->add_option("--paths", paths, "paths per state")->check(CLI::PositiveNumber);
  val->add_option("--m-cap", m_cap, "jump cap (default m + 1)")->check(CLI::PositiveNumber);
  val->add_option("--threads", threads, "worker threads");

  // replicate
  auto* rep = app.add_subcommand("replicate", "full replicate experiment and figure data");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig cfg;
    if (!config_file.empty()) {
      try {
        cfg = ExperimentConfig::load(config_file);
      } catch (const std::runtime_error& e) {
        throw UsageError(e.what());
      }
    }
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      cfg.apply(kv);
    }
    if (*seed_opt) cfg.global_seed = seed;
    if (*tol_opt) cfg.quad_tol = quad_tol;
    if (*grid_opt) cfg.grid_size = grid_size;
    if (*xmax_opt) cfg.x_max = xmax;
    cfg.validate();
    const fs::path out(out_dir);
    fs::create_directories(out);
    const ModelParams model = cfg.model();

    if (*sim) {
      Rng rng(stream_seed(cfg.global_seed, kSimulate));
      if (pairs_n > 0) {
        const Pairs p = draw_pairs(model, pairs_n, cfg.global_seed);
        std::string csv = "s,y\n";
        for (std::size_t k = 0; k < p.s.size(); ++k) csv += format_double(p.s[k]) + "," + format_double(p.y[k]) + "\n";
        write_file(out / "pairs.csv", csv);
        std::cout << nlohmann::json{{"pairs", pairs_n}, {"file", (out / "pairs.csv").string()}}.dump(2) << "\n";
      } else if (horizon > 0.0) {
        const auto traj = simulate_trajectory(model, sim_x0, horizon, rng);
        std::string csv = "t,x\n";
        for (const auto& [t, x] : traj.sample(cfg.trajectory_points)) csv += format_double(t) + "," + format_double(x) + "\n";
        write_file(out / "trajectory.csv", csv);
        std::cout << nlohmann::json{{"x0", sim_x0}, {"horizon", horizon}, {"jumps", traj.jump_times.size()}}.dump(2)
                  << "\n";
      } else {
        const auto path = simulate_chain(model, sim_x0, rng, ChainOptions{max_jumps, keep_going});
        write_file(out / "chain.csv", path.to_csv());
        emit_json(out / "chain.json", path.to_json());
      }
    } else if (*est) {
      const Fit f = fit_pairs(cfg, load_or_draw(est_src, cfg));
      emit_json(out / "estimate.json", f.report.to_json());
    } else if (*ker) {
      const Fit f = fit_pairs(cfg, load_or_draw(ker_src, cfg));
      const KernelSpec exact = exact_spec(cfg);
      std::string csv = "x,y,R,R_hat,abs_err\n";
      double worst = 0.0;
      for (int i = 0; i < k_points; ++i) {
        const double x = k_lo + (k_hi - k_lo) * i / (k_points - 1);
        if (!(x > 0.0)) continue;
        for (int j = 0; j < k_points; ++j) {
          const double y = k_lo + (k_hi - k_lo) * j / (k_points - 1);
          const double a = transition_density(exact, x, y);
          const double b = transition_density(f.spec, x, y);
          worst = std::max(worst, std::abs(a - b));
          csv += format_double(x) + "," + format_double(y) + "," + format_double(a) + "," + format_double(b) + "," +
                 format_double(std::abs(a - b)) + "\n";
        }
      }
      write_file(out / "kernel.csv", csv);
      const double bound = sup_error_bound(f.report.sup_norm, f.spec.g->sup(), std::abs(model.lambda - f.spec.lambda),
                                           cfg.lambda_lo, cfg.lambda_hi);
      nlohmann::json j = f.report.to_json();
      j["grid_max_abs_err"] = worst;
      j["sup_error_bound"] = bound;
      emit_json(out / "kernel.json", j);
    } else if (*sol || *hit) {
      const DataSource& src = *sol ? sol_src : hit_src;
      nlohmann::json j;
      KernelSpec spec = exact_spec(cfg);
      if (!src.file.empty() || src.n > 0) {
        const Fit f = fit_pairs(cfg, load_or_draw(src, cfg));
        spec = f.spec;
        j["estimator"] = f.report.to_json();
      }
      const FredholmSolver solver(spec, cfg.solver_options());
      const auto& grid = solver.grid();
      if (*sol) {
        const int m = sol_m.value_or(cfg.m);
        const auto res = solver.neumann(m);
        std::string csv = "x,p_m\n";
        for (std::size_t i = 0; i < grid.size(); ++i) csv += format_double(grid[i]) + "," + format_double(res.p[i]) + "\n";
        write_file(out / "solve.csv", csv);
        j["report"] = res.report.to_json();
        emit_json(out / "solve.json", j);
      } else {
        const int m_max = hit_m.value_or(cfg.m_hit);
        const auto t = solver.hitting(m_max);
        std::string csv = "x";
        for (int k = 1; k <= m_max; ++k) csv += ",t_" + std::to_string(k);
        csv += "\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
          csv += format_double(grid[i]);
          for (const auto& tk : t) csv += "," + format_double(tk[i]);
          csv += "\n";
        }
        write_file(out / "hitting.csv", csv);
        SolverReport rep = solver.neumann(std::max(0, m_max - 1)).report;
        j["report"] = rep.to_json();
        emit_json(out / "hitting.json", j);
      }
    } else if (*val) {
      const int cap = m_cap.value_or(cfg.m + 1);
      const FredholmSolver solver(exact_spec(cfg), cfg.solver_options());
      const auto res = solver.neumann(cap - 1);
      Rng rng(stream_seed(cfg.global_seed, kValidate));
      nlohmann::json j = {{"solver", res.report.to_json()}, {"states", nlohmann::json::array()}};
      for (double x0 : val_x0) {
        const McReport mc = mc_absorption(model, x0, cap, paths, rng, McOptions{1u << 16, threads});
        const double pm = res.p.eval(x0);
        const double band = 3.0 * mc.se + res.report.tail_bound + res.report.truncation_diag;
        nlohmann::json t = nlohmann::json::array();
        for (int k = 1; k <= cap; ++k) t.push_back(res.t[k - 1].eval(x0));
        j["states"].push_back({{"mc", mc.to_json()},
                               {"p_m", pm},
                               {"t", t},
                               {"abs_diff", std::abs(pm - mc.p_hat)},
                               {"band", band},
                               {"within_band", std::abs(pm - mc.p_hat) <= band}});
      }
      emit_json(out / "validate.json", j);
    } else if (*rep) {
      const auto table = run_replicates(cfg);
      emit_figures(table, out);
      write_file(out / "config.txt", cfg.serialize());
      nlohmann::json j;
      j["reference"] = table.reference.report.to_json();
      for (int n : cfg.ns) {
        std::vector<double> kx, ky, p;
        int ok = 0, refused = 0, failed = 0;
        for (const auto& r : table.rows) {
          if (r.n != n) continue;
          ok += r.status == "ok";
          refused += r.status == "refused";
          failed += r.status == "failed";
          kx.push_back(r.ise_kernel_x2);
          ky.push_back(r.ise_kernel_2y);
          if (r.status == "ok") p.push_back(r.ise_p);
        }
        j["n"][std::to_string(n)] = {{"ok", ok},
                                     {"refused", refused},
                                     {"failed", failed},
                                     {"median_ise_R_x_anchor", median(kx)},
                                     {"median_ise_R_anchor_y", median(ky)},
                                     {"median_ise_p", median(p)}};
      }
      emit_json(out / "summary.json", j);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
