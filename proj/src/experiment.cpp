#include "gfab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gfab/kernel.hpp"

namespace gfab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& v) {
  Int out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int<int>(key, trim(item)));
  if (out.empty()) throw std::invalid_argument("config: " + key + " is empty");
  return out;
}

// Field table shared by set() and serialize().
struct Field {
  std::function<void(ExperimentConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Field real_field(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_double(k, v);
          },
          [member](const ExperimentConfig& c) { return format_double(c.*member); }};
}

template <class T>
Field int_field(T ExperimentConfig::*member) {
  return {[member](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_int<T>(k, v);
          },
          [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
}

const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> table = {
      {"lambda", real_field(&C::lambda)},
      {"r", real_field(&C::r)},
      {"g_exponent", real_field(&C::g_exponent)},
      {"lambda_lo", real_field(&C::lambda_lo)},
      {"lambda_hi", real_field(&C::lambda_hi)},
      {"ns",
       {[](C& c, const std::string& k, const std::string& v) { c.ns = parse_int_list(k, v); },
        [](const C& c) {
          std::string s;
          for (std::size_t i = 0; i < c.ns.size(); ++i) s += (i ? "," : "") + std::to_string(c.ns[i]);
          return s;
        }}},
      {"replicates", int_field(&C::replicates)},
      {"m", int_field(&C::m)},
      {"m_hit", int_field(&C::m_hit)},
      {"t_ise_max", int_field(&C::t_ise_max)},
      {"x_eval", real_field(&C::x_eval)},
      {"kernel_anchor", real_field(&C::kernel_anchor)},
      {"kernel_lo", real_field(&C::kernel_lo)},
      {"kernel_hi", real_field(&C::kernel_hi)},
      {"kernel_points", int_field(&C::kernel_points)},
      {"p_lo", real_field(&C::p_lo)},
      {"p_hi", real_field(&C::p_hi)},
      {"p_points", int_field(&C::p_points)},
      {"trajectories", int_field(&C::trajectories)},
      {"trajectory_x0", real_field(&C::trajectory_x0)},
      {"trajectory_horizon", real_field(&C::trajectory_horizon)},
      {"trajectory_points", int_field(&C::trajectory_points)},
      {"grid_size", int_field(&C::grid_size)},
      {"node_eps", real_field(&C::node_eps)},
      {"x_max", real_field(&C::x_max)},
      {"gauss_points", int_field(&C::gauss_points)},
      {"quad_tol", real_field(&C::quad_tol)},
      {"kde_nodes", int_field(&C::kde_nodes)},
      {"sup_grid", int_field(&C::sup_grid)},
      {"eps0", real_field(&C::eps0)},
      {"global_seed", int_field(&C::global_seed)},
      {"threads", int_field(&C::threads)},
  };
  return table;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ModelParams ExperimentConfig::model() const {
  ModelParams p;
  p.lambda = lambda;
  p.r = r;
  p.g = make_power_density(g_exponent);
  p.lambda_lo = lambda_lo;
  p.lambda_hi = lambda_hi;
  return p;
}

SolverOptions ExperimentConfig::solver_options() const {
  SolverOptions o;
  o.grid_size = grid_size;
  o.node_eps = node_eps;
  o.x_max = x_max;
  o.gauss_points = gauss_points;
  return o;
}

void ExperimentConfig::validate() const {
  model().validate();
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("config: ") + what);
  };
  need(!ns.empty(), "ns must not be empty");
  for (int n : ns) need(n >= 2, "every n must be >= 2");
  need(replicates >= 1, "replicates must be >= 1");
  need(m >= 0, "m must be >= 0");
  need(m_hit >= 1, "m_hit must be >= 1");
  need(t_ise_max >= 1, "t_ise_max must be >= 1");
  need(x_eval > 1.0, "x_eval must exceed 1");
  need(kernel_lo >= 1.0 && kernel_hi > kernel_lo, "need 1 <= kernel_lo < kernel_hi");
  need(kernel_anchor > 1.0, "kernel_anchor must exceed 1");
  need(kernel_points >= 2 && p_points >= 2, "curve point counts must be >= 2");
  need(p_lo >= 1.0 && p_hi > p_lo, "need 1 <= p_lo < p_hi");
  need(trajectories >= 0, "trajectories must be >= 0");
  need(trajectory_x0 > 0.0 && trajectory_horizon > 0.0, "trajectory_x0 and trajectory_horizon must be > 0");
  need(trajectory_points >= 2, "trajectory_points must be >= 2");
  need(grid_size >= 2, "grid_size must be >= 2");
  need(node_eps > 0.0 && x_max > 1.0 + node_eps, "need 0 < node_eps < x_max - 1");
  need(gauss_points >= 1, "gauss_points must be >= 1");
  need(quad_tol > 0.0, "quad_tol must be > 0");
  need(kde_nodes >= 3 && sup_grid >= 2, "kde_nodes >= 3 and sup_grid >= 2");
  need(eps0 > 0.0 && eps0 < 1.0, "eps0 must lie in (0, 1)");
  need(threads >= 0, "threads must be >= 0");
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(*this, key, value);
      return;
    }
  }
  throw std::invalid_argument("config: unknown key '" + key + "'");
}

void ExperimentConfig::apply(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig c;
  c.apply(text);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read config " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(*this) + "\n";
  return out;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
  if (v.empty()) return kNaN;
  return quantile(std::move(v), 0.5);
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Reference compute_reference(const ExperimentConfig& cfg) {
  const ModelParams model = cfg.model();
  const KernelSpec spec{model.lambda, model.r, model.g, cfg.quad_tol};
  Reference ref;
  ref.kernel_args = linspace(cfg.kernel_lo, cfg.kernel_hi, cfg.kernel_points);
  ref.p_args = linspace(cfg.p_lo, cfg.p_hi, cfg.p_points);
  for (double v : ref.kernel_args) {
    ref.kernel_x2.push_back(transition_density(spec, v, cfg.kernel_anchor));
    ref.kernel_2y.push_back(transition_density(spec, cfg.kernel_anchor, v));
  }
  const FredholmSolver solver(spec, cfg.solver_options());
  auto sol = solver.neumann(cfg.m);
  ref.p = sol.p;
  ref.report = sol.report;
  ref.t = solver.hitting(std::max({cfg.m_hit, cfg.t_ise_max}));
  for (double x : ref.p_args) ref.p_curve.push_back(ref.p->eval(x));
  for (int k = 0; k < cfg.m_hit; ++k) ref.t_at_x.push_back(ref.t[k].eval(cfg.x_eval));
  return ref;
}

ReplicateRecord run_one(const ExperimentConfig& cfg, const Reference& ref, int n, int replicate,
                        std::span<const double> s, std::span<const double> y) {
  ReplicateRecord rec;
  rec.n = n;
  rec.replicate = replicate;
  const ModelParams model = cfg.model();
  try {
    const auto lam = estimate_lambda_tmle(s, cfg.lambda_lo, cfg.lambda_hi);
    const auto kde = KdeEstimate::fit(y);
    const auto exact_hat = kde.exact_density();
    rec.estimator.lambda = lam;
    rec.estimator.bandwidth = kde.bandwidth();
    rec.estimator.sup_norm = sup_norm_diagnostic(*exact_hat, *model.g, unit_grid(cfg.sup_grid));
    rec.estimator.weighted_l1 = weighted_l1_diagnostic(*exact_hat, model.g.get(), cfg.eps0);

    const KernelSpec est{lam.value, model.r, kde.tabulated_density(cfg.kde_nodes), cfg.quad_tol};
    for (double v : ref.kernel_args) {
      rec.kernel_x2_hat.push_back(transition_density(est, v, cfg.kernel_anchor));
      rec.kernel_2y_hat.push_back(transition_density(est, cfg.kernel_anchor, v));
    }
    rec.ise_kernel_x2 = ise_samples(ref.kernel_args, rec.kernel_x2_hat, ref.kernel_x2);
    rec.ise_kernel_2y = ise_samples(ref.kernel_args, rec.kernel_2y_hat, ref.kernel_2y);

    try {
      rec.kappa_hat = contraction_bound(est, cfg.eps0);
      rec.has_kappa = true;
      const FredholmSolver solver(est, cfg.solver_options());
      const auto sol = solver.neumann(cfg.m);
      const auto t = solver.hitting(std::max({cfg.m_hit, cfg.t_ise_max}));
      for (double x : ref.p_args) rec.p_hat.push_back(sol.p.eval(x));
      rec.ise_p = ise(sol.p, *ref.p);
      for (int k = 0; k < cfg.t_ise_max; ++k) rec.ise_t.push_back(ise(t[k], ref.t[k]));
      for (int k = 0; k < cfg.m_hit; ++k) rec.t_at_x.push_back(t[k].eval(cfg.x_eval));
    } catch (const ContractionError& e) {
      rec.status = "refused";
      rec.reason = e.what();
    } catch (const DivergentWeightError& e) {
      rec.status = "refused";
      rec.reason = e.what();
    }
  } catch (const std::exception& e) {
    rec.status = "failed";
    rec.reason = e.what();
  }
  return rec;
}

ReplicateTable run_replicates(const ExperimentConfig& cfg) {
  cfg.validate();
  ReplicateTable table;
  table.config = cfg;
  table.reference = compute_reference(cfg);
  const ModelParams model = cfg.model();

  for (int i = 0; i < cfg.trajectories; ++i) {
    Rng rng(stream_seed(cfg.global_seed, (1ull << 32) + static_cast<std::uint64_t>(i)));
    table.trajectories.push_back(simulate_trajectory(model, cfg.trajectory_x0, cfg.trajectory_horizon, rng));
  }

  const int n_max = *std::max_element(cfg.ns.begin(), cfg.ns.end());
  const std::size_t per_rep = cfg.ns.size();
  std::vector<ReplicateRecord> results(per_rep * cfg.replicates);

  auto work = [&](int rep) {
    Rng rng(stream_seed(cfg.global_seed, static_cast<std::uint64_t>(rep)));
    std::vector<double> s(n_max), y(n_max);
    for (int k = 0; k < n_max; ++k) {
      s[k] = rng.exponential(model.lambda);
      y[k] = sample_loss_fraction(*model.g, rng);
    }
    for (std::size_t j = 0; j < per_rep; ++j) {
      const int n = cfg.ns[j];
      results[j * cfg.replicates + rep] =
          run_one(cfg, table.reference, n, rep, std::span(s).first(n), std::span(y).first(n));
    }
  };

  unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min(threads, static_cast<unsigned>(cfg.replicates)));
  if (threads == 1) {
    for (int rep = 0; rep < cfg.replicates; ++rep) work(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (int rep = next++; rep < cfg.replicates; rep = next++) work(rep);
      });
    }
    for (auto& th : pool) th.join();
  }
  table.rows = std::move(results);
  return table;
}

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& file, const std::string& header) : path_(file), out_(file) {
    if (!out_) throw std::runtime_error("cannot write " + file.string());
    out_ << header << '\n';
  }
  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << '\n';
  }
  ~CsvWriter() noexcept(false) {
    out_.flush();
    if (!out_ && std::uncaught_exceptions() == 0) throw std::runtime_error("write failed: " + path_.string());
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  static std::string cell(const char* v) { return cell(std::string(v)); }

  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

void emit_figures(const ReplicateTable& table, const std::filesystem::path& outdir) {
  std::filesystem::create_directories(outdir);
  const auto& cfg = table.config;
  const auto& ref = table.reference;

  {
    CsvWriter w(outdir / "trajectories.csv", "trajectory,t,x");
    for (std::size_t i = 0; i < table.trajectories.size(); ++i) {
      for (const auto& [t, x] : table.trajectories[i].sample(cfg.trajectory_points)) w.row(i, t, x);
    }
  }
  {
    CsvWriter curves(outdir / "kernel_curves.csv", "curve,n,replicate,arg,R,R_hat,abs_err");
    CsvWriter ises(outdir / "kernel_ise.csv", "n,replicate,ise_R_x_anchor,ise_R_anchor_y");
    for (const auto& rec : table.rows) {
      if (rec.kernel_x2_hat.empty()) continue;
      for (std::size_t k = 0; k < ref.kernel_args.size(); ++k) {
        curves.row("R_x_anchor", rec.n, rec.replicate, ref.kernel_args[k], ref.kernel_x2[k],
                   rec.kernel_x2_hat[k], std::abs(rec.kernel_x2_hat[k] - ref.kernel_x2[k]));
      }
      for (std::size_t k = 0; k < ref.kernel_args.size(); ++k) {
        curves.row("R_anchor_y", rec.n, rec.replicate, ref.kernel_args[k], ref.kernel_2y[k],
                   rec.kernel_2y_hat[k], std::abs(rec.kernel_2y_hat[k] - ref.kernel_2y[k]));
      }
      ises.row(rec.n, rec.replicate, rec.ise_kernel_x2, rec.ise_kernel_2y);
    }
  }
  {
    CsvWriter curves(outdir / "p_curves.csv", "n,replicate,x,p_m,p_hat,abs_err");
    CsvWriter ises(outdir / "p_ise.csv", "n,replicate,ise");
    CsvWriter tises(outdir / "t_ise.csv", "n,replicate,m,ise");
    for (const auto& rec : table.rows) {
      if (rec.status != "ok") continue;
      for (std::size_t k = 0; k < ref.p_args.size(); ++k) {
        curves.row(rec.n, rec.replicate, ref.p_args[k], ref.p_curve[k], rec.p_hat[k],
                   std::abs(rec.p_hat[k] - ref.p_curve[k]));
      }
      ises.row(rec.n, rec.replicate, rec.ise_p);
      for (std::size_t k = 0; k < rec.ise_t.size(); ++k) tises.row(rec.n, rec.replicate, k + 1, rec.ise_t[k]);
    }
  }
  {
    CsvWriter w(outdir / "t_dist.csv", "n,m,t_true,mean,q1,q3");
    std::map<int, std::vector<const ReplicateRecord*>> by_n;
    for (const auto& rec : table.rows) {
      if (rec.status == "ok") by_n[rec.n].push_back(&rec);
    }
    for (int n : cfg.ns) {
      const auto it = by_n.find(n);
      if (it == by_n.end()) continue;
      for (int m = 1; m <= cfg.m_hit; ++m) {
        std::vector<double> v;
        for (const auto* rec : it->second) v.push_back(rec->t_at_x[m - 1]);
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        w.row(n, m, ref.t_at_x[m - 1], mean, quantile(v, 0.25), quantile(v, 0.75));
      }
    }
  }
  {
    CsvWriter w(outdir / "replicates.csv",
                "n,replicate,status,reason,lambda_hat,lambda_raw,bandwidth,sup_norm,weighted_l1,kappa_hat");
    for (const auto& rec : table.rows) {
      w.row(rec.n, rec.replicate, rec.status, rec.reason, rec.estimator.lambda.value, rec.estimator.lambda.raw,
            rec.estimator.bandwidth, rec.estimator.sup_norm, rec.estimator.weighted_l1,
            rec.has_kappa ? rec.kappa_hat : kNaN);
    }
  }
}

}  // namespace gfab
