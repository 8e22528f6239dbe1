// Acceptance checks: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gfab/estimators.hpp"
#include "gfab/experiment.hpp"
#include "gfab/fredholm.hpp"
#include "gfab/kernel.hpp"
#include "gfab/mc_oracle.hpp"
#include "gfab/model.hpp"

using namespace gfab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail, double seconds) {
  std::printf("%s  %2d  %-34s %s [%.2f s]\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class F>
void criterion(int id, const std::string& name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, name, ok, detail, secs);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KernelSpec reference_spec(double tol = 1e-8) { return KernelSpec{1.0, 1.0, make_power_density(10.0), tol}; }

DensityPtr uniform_half() {
  return std::make_shared<CallableDensity>([](double u) { return u >= 0.5 && u <= 1.0 ? 2.0 : 0.0; },
                                           std::vector<double>{0.5}, "uniform[1/2,1]");
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "gfab_acceptance";
  fs::remove_all(work);

  criterion(1, "contraction constant", [](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    const double k = contraction_bound(reference_spec());
    auto callable = std::make_shared<CallableDensity>([](double u) { return 11.0 * std::pow(u, 10.0); });
    const double kq = contraction_bound(KernelSpec{1.0, 1.0, callable, 1e-8});
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d = fmt("kappa=%.15g (quadrature %.15g), tol 1e-8, time %.3f s < 1 s", k, kq, secs);
    return std::abs(k - 0.55) <= 1e-8 && std::abs(kq - 0.55) <= 1e-8 && secs < 1.0;
  });

  criterion(2, "Neumann tail bound", [](std::string& d) {
    const auto t0 = std::chrono::steady_clock::now();
    const FredholmSolver solver(reference_spec());
    const auto res = solver.neumann(10);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d = fmt("|s|=%.6g kappa=%.4g tail_bound=%.4g <= 1.6e-4, time %.2f s < 60 s", res.report.s_norm,
            res.report.kappa, res.report.tail_bound, secs);
    return res.report.tail_bound <= 1.6e-4 && secs < 60.0;
  });

  criterion(3, "uniform kernel error bound", [](std::string& d) {
    const auto exact = reference_spec(1e-10);
    const auto g = exact.g;
    const auto fine = unit_grid(20001);
    double worst_ratio = 0.0;
    bool ok = true;
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
      Rng rng(stream_seed(1, rep));
      std::vector<double> s(100), y(100);
      for (int k = 0; k < 100; ++k) {
        s[k] = rng.exponential(1.0);
        y[k] = g->sample(rng);
      }
      const auto lam = estimate_lambda_tmle(s, 0.5, 2.0);
      const auto g_hat = KdeEstimate::fit(y).tabulated_density(2049);
      const KernelSpec est{lam.value, 1.0, g_hat, 1e-10};
      const double bound = sup_error_bound(sup_norm_diagnostic(*g_hat, *g, fine), g_hat->sup(),
                                           std::abs(1.0 - lam.value), 0.5, 2.0);
      double measured = 0.0;
      for (int i = 0; i < 50; ++i) {
        const double x = 1.0 + 4.0 * i / 49.0;
        for (int j = 0; j < 50; ++j) {
          const double yy = 5.0 * j / 49.0;
          measured = std::max(measured, std::abs(transition_density(exact, x, yy) - transition_density(est, x, yy)));
        }
      }
      ok = ok && measured <= bound;
      worst_ratio = std::max(worst_ratio, measured / bound);
    }
    d = fmt("10 replicates n=100, worst measured/bound = %.3g", worst_ratio);
    return ok;
  });

  criterion(4, "column mass identity", [](std::string& d) {
    const double tol = 1e-8;
    const std::vector<double> ys{1.0, 1.0001, 1.5, 2.0, 3.0, 5.0, 10.0, 50.0, 200.0, 0.5, 0.9};
    auto check = [&](const KernelSpec& spec, double expected, double& err) {
      double sup = 0.0;
      for (double y : ys) sup = std::max(sup, integrate_column(spec, y));
      err = std::abs(sup - expected);
      return err <= 10 * tol;
    };
    const auto t0 = std::chrono::steady_clock::now();
    double e1 = 0.0, e2 = 0.0;
    const KernelSpec alt{1.0, 1.0, uniform_half(), tol};
    const double kalt = 0.5 * 2.0 * std::log(2.0);
    const bool ok = check(reference_spec(tol), 0.55, e1) && check(alt, kalt, e2);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    d = fmt("|sup_y col - kappa| = %.3g (power), %.3g (uniform half), tol %.0e, time %.2f s", e1, e2, 10 * tol,
            secs);
    return ok && secs < 60.0;
  });

  criterion(5, "f_lambda <= 1/lambda", [](std::string& d) {
    Rng rng(5);
    int violations = 0;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double lambda = 0.05 + 5.0 * rng.uniform();
      const double r = 0.05 + 5.0 * rng.uniform();
      const double x = 1.0 + std::exp(-9.0 + 15.0 * rng.uniform());
      const double y = std::exp(-6.0 + 12.0 * rng.uniform());
      const double v = lambda * f_lambda(lambda, r, x, y);
      worst = std::max(worst, v);
      violations += v > 1.0;
    }
    d = fmt("1000 random (x, y, lambda, r): %d violations, max lambda*f = %.6f", violations, worst);
    return violations == 0;
  });

  criterion(6, "row stochasticity", [](std::string& d) {
    const auto spec = reference_spec();
    const double tol = 10 * spec.quad_tol;
    bool ok = true;
    std::string parts;
    for (double x : {1.2, 2.0, 5.0, 20.0}) {
      const double Y = 1.0 + (x - 1.0) * 1e4;
      const double mass = integrate_row(spec, x, 0.0, Y);
      const double tail = tail_mass_bound(x, Y, spec.lambda, spec.r);
      ok = ok && mass >= 1.0 - tail - tol && mass <= 1.0 + tol;
      parts += fmt(" x=%g:%.10f", x, mass);
    }
    d = fmt("mass in [1 - 1e-4 - tol, 1 + tol], tol %.0e;", tol) + parts;
    return ok;
  });

  criterion(7, "Monte-Carlo agreement", [](std::string& d) {
    const auto spec = reference_spec();
    const FredholmSolver solver(spec);
    const auto res = solver.neumann(10);
    ModelParams model;
    Rng rng(stream_seed(7, 0));
    bool ok = true;
    double worst = 0.0;
    for (double x0 : {1.1, 1.5, 2.0, 3.0}) {
      const auto mc = mc_absorption(model, x0, 11, 1000000, rng);
      const double band = 3.0 * mc.se + res.report.tail_bound + res.report.truncation_diag;
      const double diff = std::abs(res.p.eval(x0) - mc.p_hat);
      ok = ok && diff <= band;
      worst = std::max(worst, diff / band);
      if (x0 == 1.1) {
        for (int k = 1; k <= 6; ++k) {
          const double t = res.t[k - 1].eval(x0);
          const double dk = std::abs(t - mc.freq(k));
          ok = ok && dk <= 3.0 * mc.freq_se(k);
          worst = std::max(worst, dk / (3.0 * mc.freq_se(k)));
        }
      }
    }
    d = fmt("p_10 at 4 states, t_1..t_6 at 1.1, 1e6 paths; worst diff/band = %.3f", worst);
    return ok;
  });

  ExperimentConfig cfg;  // defaults: 100 replicates, n = 50, 75, 100
  std::optional<ReplicateTable> first;

  criterion(8, "error decreases with n", [&](std::string& d) {
    first = run_replicates(cfg);
    emit_figures(*first, work / "run1");
    auto medians = [&](auto pick) {
      std::vector<double> out;
      for (int n : cfg.ns) {
        std::vector<double> v;
        for (const auto& r : first->rows) {
          if (r.n == n && r.status == "ok") v.push_back(pick(r));
        }
        out.push_back(median(v));
      }
      return out;
    };
    auto decreasing = [](const std::vector<double>& m) {
      for (std::size_t i = 1; i < m.size(); ++i) {
        if (!(m[i] < m[i - 1])) return false;
      }
      return true;
    };
    std::vector<std::pair<std::string, std::vector<double>>> series = {
        {"R(.,2)", medians([](const ReplicateRecord& r) { return r.ise_kernel_x2; })},
        {"R(2,.)", medians([](const ReplicateRecord& r) { return r.ise_kernel_2y; })},
        {"p", medians([](const ReplicateRecord& r) { return r.ise_p; })}};
    for (int m = 1; m <= cfg.t_ise_max; ++m) {
      series.push_back({"t" + std::to_string(m), medians([m](const ReplicateRecord& r) { return r.ise_t[m - 1]; })});
    }
    bool ok = true;
    int refused = 0;
    for (const auto& r : first->rows) refused += r.status != "ok";
    for (const auto& [name, m] : series) {
      ok = ok && decreasing(m);
      d += fmt("%s %.2e>%.2e>%.2e%s ", name.c_str(), m[0], m[1], m[2], decreasing(m) ? "" : "(!)");
    }
    d += fmt("; %d non-ok rows", refused);
    return ok;
  });

  criterion(9, "exact identities", [](std::string& d) {
    const FredholmSolver solver(reference_spec());
    const auto res = solver.neumann(10);
    const auto p0 = solver.neumann(0);
    bool ok = true;
    for (std::size_t i = 0; i < solver.grid().size(); ++i) {
      double acc = res.t[0][i];
      for (std::size_t k = 1; k < res.t.size(); ++k) acc += res.t[k][i];
      ok = ok && acc == res.p[i] && res.t[0][i] == solver.s()[i] && p0.p[i] == solver.s()[i];
    }
    ModelParams model;
    Rng rng(9);
    double residual = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const auto path = simulate_chain(model, 1.0 + rng.uniform(), rng, ChainOptions{50, true});
      double prev = path.z0;
      for (const auto& st : path.steps) {
        residual = std::max(residual, std::abs(st.z - flow(prev, st.s, model.r) * st.y));
        prev = st.z;
      }
    }
    ok = ok && residual == 0.0;
    d = fmt("p_m = sum t_k, t_1 = s, p_0 = s bitwise; path residual %.1g", residual);
    return ok;
  });

  criterion(10, "determinism", [&](std::string& d) {
    if (!first) {
      d = "first run missing";
      return false;
    }
    ExperimentConfig again = cfg;
    again.threads = 2;
    emit_figures(run_replicates(again), work / "run2");
    int files = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(work / "run1")) {
      ++files;
      differ += slurp(entry.path()) != slurp(work / "run2" / entry.path().filename());
    }
    d = fmt("%d CSV files compared, %d differ (second run with 2 threads)", files, differ);
    return files == 8 && differ == 0;
  });

  std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
