#include "gfab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gfab/quadrature.hpp"

namespace gfab {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

// Quantile with linear interpolation between order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

class KdeView final : public Density {
 public:
  explicit KdeView(KdeEstimate kde) : kde_(std::move(kde)) {
    for (double u : unit_grid(4097)) sup_ = std::max(sup_, kde_.eval(u));
    // Margin for peaks between grid points: the kernel sum is smooth at the
    // bandwidth scale, which is far coarser than the grid.
    sup_ *= 1.0 + 1e-6;
  }
  double eval(double u) const override { return (u < 0.0 || u > 1.0) ? 0.0 : kde_.eval(u); }
  double cdf(double u) const override {
    if (u <= 0.0) return 0.0;
    return kde_.cdf(std::min(u, 1.0)) - kde_.cdf(0.0);
  }
  double cdf_inverse(double q) const override {
    if (q <= 0.0) return 0.0;
    if (q >= 1.0) return 1.0;
    const double target = q * cdf(1.0);
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 100; ++i) {
      const double mid = 0.5 * (lo + hi);
      (cdf(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
  double sup() const override { return sup_; }
  std::string describe() const override { return "kde(exact)"; }

 private:
  KdeEstimate kde_;
  double sup_ = 0.0;
};

}  // namespace

LambdaEstimate estimate_lambda_tmle(std::span<const double> s, double lo, double hi) {
  if (s.empty()) throw std::invalid_argument("estimate_lambda_tmle: empty sample");
  if (!(lo > 0.0) || !(lo <= hi)) throw std::invalid_argument("estimate_lambda_tmle: need 0 < lo <= hi");
  double total = 0.0;
  for (double v : s) {
    if (!(v > 0.0)) throw std::invalid_argument("estimate_lambda_tmle: interarrival times must be > 0");
    total += v;
  }
  LambdaEstimate est;
  est.n = s.size();
  est.lo = lo;
  est.hi = hi;
  est.raw = static_cast<double>(s.size()) / total;
  est.value = std::clamp(est.raw, lo, hi);
  return est;
}

double bandwidth_silverman(std::span<const double> y) {
  if (y.size() < 2) throw std::invalid_argument("bandwidth_silverman: need at least two samples");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*lo == *hi) throw std::invalid_argument("bandwidth_silverman: degenerate sample (zero spread)");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (!(sd > 0.0)) throw std::invalid_argument("bandwidth_silverman: degenerate sample (zero spread)");
  std::vector<double> sorted(y.begin(), y.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(n, -0.2);
}

KdeEstimate::KdeEstimate(std::vector<double> samples, double bandwidth)
    : samples_(std::move(samples)), h_(bandwidth) {
  if (samples_.empty()) throw std::invalid_argument("KdeEstimate: empty sample");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("KdeEstimate: bandwidth must be > 0");
}

KdeEstimate KdeEstimate::fit(std::span<const double> samples) {
  return KdeEstimate(std::vector<double>(samples.begin(), samples.end()), bandwidth_silverman(samples));
}

double KdeEstimate::eval(double x) const {
  double sum = 0.0;
  for (double yi : samples_) {
    const double z = (yi - x) / h_;
    sum += std::exp(-0.5 * z * z);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(samples_.size()) * h_);
}

double KdeEstimate::derivative(double x) const {
  double sum = 0.0;
  for (double yi : samples_) {
    const double z = (yi - x) / h_;
    sum += z * std::exp(-0.5 * z * z);
  }
  return sum * kInvSqrt2Pi / (static_cast<double>(samples_.size()) * h_ * h_);
}

double KdeEstimate::cdf(double x) const {
  double sum = 0.0;
  for (double yi : samples_) sum += 0.5 * std::erfc((yi - x) / (h_ * M_SQRT2));
  return sum / static_cast<double>(samples_.size());
}

DensityPtr KdeEstimate::exact_density() const { return std::make_shared<KdeView>(*this); }

DensityPtr KdeEstimate::tabulated_density(int nodes) const {
  return tabulate_density([this](double u) { return eval(u); }, [this](double u) { return derivative(u); },
                          nodes, "kde(hermite)");
}

double sup_norm_diagnostic(const Density& g_hat, const Density& g, std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("sup_norm_diagnostic: empty grid");
  double worst = 0.0;
  for (double u : grid) worst = std::max(worst, std::abs(g.eval(u) - g_hat.eval(u)));
  return worst;
}

double weighted_l1_diagnostic(const Density& g_hat, const Density* g, double eps0) {
  if (!(eps0 > 0.0 && eps0 < 1.0)) throw std::invalid_argument("weighted_l1_diagnostic: eps0 must lie in (0, 1)");
  // Integrate in t = log u so the 1/u weight becomes flat.
  std::vector<double> breaks{std::log(eps0)};
  std::vector<double> bp = g_hat.breakpoints();
  if (g) {
    const auto more = g->breakpoints();
    bp.insert(bp.end(), more.begin(), more.end());
  }
  // Dyadic cuts keep the first Kronrod pass from sampling only the empty
  // stretch near eps0.
  for (double u = 0.5; u > eps0; u *= 0.5) bp.push_back(u);
  std::sort(bp.begin(), bp.end());
  for (double u : bp) {
    if (u > eps0 && u < 1.0) breaks.push_back(std::log(u));
  }
  breaks.push_back(0.0);
  if (g) {
    // |g - g_hat| has kinks where the two cross; GK error estimates miss them.
    auto diff = [&](double t) { return g->eval(std::exp(t)) - g_hat.eval(std::exp(t)); };
    std::vector<double> crossings;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
      constexpr int kScan = 64;
      double a = breaks[p], fa = diff(a);
      for (int i = 1; i <= kScan; ++i) {
        const double b = breaks[p] + (breaks[p + 1] - breaks[p]) * i / kScan;
        const double fb = diff(b);
        if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
          double lo = a, hi = b, flo = fa;
          for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = diff(mid);
            if ((fm < 0.0) == (flo < 0.0)) {
              lo = mid;
              flo = fm;
            } else {
              hi = mid;
            }
          }
          crossings.push_back(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
      }
    }
    breaks.insert(breaks.end(), crossings.begin(), crossings.end());
    std::sort(breaks.begin(), breaks.end());
  }
  auto integrand = [&](double t) {
    const double u = std::exp(t);
    return g ? std::abs(g->eval(u) - g_hat.eval(u)) : g_hat.eval(u);
  };
  return quad::integrate_pieces(integrand, breaks, {1e-9, 1e-14, 20000}).value;
}

nlohmann::json EstimatorReport::to_json() const {
  return {{"lambda_hat", lambda.value}, {"raw", lambda.raw},       {"bandwidth", bandwidth},
          {"sup_norm", sup_norm},       {"weighted_l1", weighted_l1}, {"n", lambda.n}};
}

std::vector<double> unit_grid(int points) {
  if (points < 2) throw std::invalid_argument("unit_grid: need >= 2 points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = static_cast<double>(i) / (points - 1);
  return g;
}

}  // namespace gfab
