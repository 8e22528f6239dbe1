#include "gfab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gfab/quadrature.hpp"

namespace gfab {

namespace {

constexpr double kFourOverE = 4.0 / M_E;

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Break points strictly inside (lo, hi), framed by lo and hi.
std::vector<double> frame(double lo, double hi, const std::vector<double>& inner) {
  std::vector<double> out{lo};
  for (double v : sorted_unique(inner)) {
    if (v > lo && v < hi) out.push_back(v);
  }
  out.push_back(hi);
  return out;
}

// int_0^W g(y w/(1+w)) w^a / (1+w) dw, split at w = 1; the upper part is
// integrated in log w. `c` caps u against rounding past the true limit.
double inner_w_integral(const Density& g, double a, double y, double c, double W, double tol) {
  auto h = [&](double w) {
    const double u = std::min(y * w / (1.0 + w), c);
    return g.eval(u) * std::pow(w, a) / (1.0 + w);
  };
  std::vector<double> wb;
  for (double ub : g.breakpoints()) {
    if (ub > 0.0 && ub < c) wb.push_back(ub / (y - ub));
  }
  const quad::Tolerance t{tol, 0.0, 4000};
  double total = 0.0;
  const double w_mid = std::min(W, 1.0);
  total += quad::integrate_pieces(h, frame(0.0, w_mid, wb), t).value;
  if (W > 1.0) {
    std::vector<double> tb;
    for (double w : wb) {
      if (w > 1.0) tb.push_back(std::log(w));
    }
    auto hl = [&](double s) {
      const double w = std::exp(s);
      return h(w) * w;
    };
    total += quad::integrate_pieces(hl, frame(0.0, std::log(W), tb), t).value;
  }
  return total;
}

}  // namespace

void KernelSpec::validate() const {
  if (!(lambda > 0.0) || !(r > 0.0)) throw std::invalid_argument("KernelSpec: lambda and r must be > 0");
  if (!g) throw std::invalid_argument("KernelSpec: missing density");
  if (!(quad_tol > 0.0)) throw std::invalid_argument("KernelSpec: quad_tol must be > 0");
}

KernelSpec KernelSpec::with_tol(double tol) const {
  KernelSpec k = *this;
  k.quad_tol = tol;
  return k;
}

double beta_integral(const KernelSpec& spec, double x, double y) {
  if (!(x >= 1.0)) throw std::domain_error("beta_integral: x must be >= 1");
  if (y <= 0.0) return 0.0;
  const double top = std::max(x, y) - 1.0;
  if (!(top > 0.0)) throw std::domain_error("beta_integral: diverges at x = 1, y <= 1");
  const double c = std::min(y / x, 1.0);
  return inner_w_integral(*spec.g, spec.ratio(), y, c, 1.0 / top, spec.quad_tol);
}

double transition_density(const KernelSpec& spec, double x, double y) {
  if (!(x > 0.0)) throw std::domain_error("transition_density: x must be > 0");
  if (y < 0.0) return 0.0;
  if (x <= 1.0) return spec.g->eval(y / x) / x;
  const double a = spec.ratio();
  return a * std::pow(x - 1.0, a) * beta_integral(spec, x, y);
}

double f_lambda(double lambda, double r, double x, double y, double quad_tol) {
  static const DensityPtr unit = make_power_density(0.0);
  const KernelSpec spec{lambda, r, unit, quad_tol};
  const double a = spec.ratio();
  return std::pow(x - 1.0, a) / r * beta_integral(spec, x, y);
}

double tail_mass_bound(double x, double y_max, double lambda, double r) {
  if (x <= 1.0) return 0.0;
  if (!(y_max > x)) throw std::invalid_argument("tail_mass_bound: y_max must exceed x");
  return std::pow((x - 1.0) / (y_max - 1.0), lambda / r);
}

double sup_error_bound(double sup_g_err, double sup_g_hat, double lambda_err, double lambda_lo,
                       double lambda_hi) {
  if (!(lambda_lo > 0.0)) throw std::invalid_argument("sup_error_bound: lambda_lo must be > 0");
  if (sup_g_err < 0.0 || sup_g_hat < 0.0 || lambda_err < 0.0) {
    throw std::invalid_argument("sup_error_bound: inputs must be >= 0");
  }
  return sup_g_err + (1.0 / lambda_lo) * (kFourOverE * lambda_hi / lambda_lo + 1.0) * sup_g_hat * lambda_err;
}

double column_l1_bound(double weighted_l1_diff, double weighted_g_hat, double lambda, double lambda_hat,
                       double r, double lambda_lo, double lambda_hi) {
  return lambda / (lambda + r) * weighted_l1_diff +
         lambda_hi * (kFourOverE / (lambda_lo * lambda_lo) + 1.0 / (lambda_lo + r)) * weighted_g_hat *
             std::abs(lambda - lambda_hat);
}

void transition_density_column(const KernelSpec& spec, double y, std::span<const double> xs,
                               std::span<double> out) {
  static const quad::Rule rule = quad::gauss_legendre(8);
  constexpr double kMaxRatio = 1.5;      // geometric width of one piece in w
  constexpr double kMaxDu = 1.0 / 64.0;  // width of one piece in u
  if (out.size() != xs.size()) throw std::invalid_argument("transition_density_column: size mismatch");
  if (xs.empty()) return;
  if (!(xs.front() > 1.0)) throw std::domain_error("transition_density_column: states must exceed 1");
  if (y <= 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const Density& g = *spec.g;
  const double a = spec.ratio();

  // Upper limits in w, walked from the largest x (smallest W) downwards.
  const std::size_t n = xs.size();
  auto limit = [&](std::size_t i) { return 1.0 / (std::max(xs[i], y) - 1.0); };
  const double c_max = std::min(y / xs.front(), 1.0);
  std::vector<double> wb;
  for (double ub : g.breakpoints()) {
    if (ub > 0.0 && ub < c_max) wb.push_back(ub / (y - ub));
  }
  std::sort(wb.begin(), wb.end());

  auto u_of = [y](double w) { return y * w / (1.0 + w); };
  auto h = [&](double w) { return g.eval(u_of(w)) * std::pow(w, a) / (1.0 + w); };
  auto gl = [&](double w0, double w1) {
    const double mid = 0.5 * (w0 + w1);
    const double half = 0.5 * (w1 - w0);
    double s = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * h(mid + half * rule.nodes[k]);
    return s * half;
  };
  // Integral over [w0, w1] split so every piece is short in log w and in u.
  auto piece = [&](double w0, double w1) {
    if (!(w1 > w0)) return 0.0;
    const double du = u_of(w1) - u_of(w0);
    const int by_u = static_cast<int>(std::ceil(du / kMaxDu));
    const int by_ratio = w0 > 0.0 ? static_cast<int>(std::ceil(std::log(w1 / w0) / std::log(kMaxRatio))) : 1;
    const int parts = std::max({1, by_u, by_ratio});
    double s = 0.0;
    if (by_u >= by_ratio) {
      const double u0 = u_of(w0);
      double prev = w0;
      for (int p = 1; p <= parts; ++p) {
        const double u = p == parts ? u_of(w1) : u0 + du * p / parts;
        const double w = p == parts ? w1 : u / (y - u);
        s += gl(prev, w);
        prev = w;
      }
    } else {
      const double q = std::pow(w1 / w0, 1.0 / parts);
      double prev = w0;
      for (int p = 1; p <= parts; ++p) {
        const double w = p == parts ? w1 : prev * q;
        s += gl(prev, w);
        prev = w;
      }
    }
    return s;
  };

  const double first = limit(n - 1);
  double w_prev = first / 1024.0;
  double acc = gl(0.0, w_prev);
  std::size_t next_break = 0;
  for (std::size_t idx = n; idx-- > 0;) {
    const double target = limit(idx);
    while (next_break < wb.size() && wb[next_break] < target) {
      if (wb[next_break] > w_prev) {
        acc += piece(w_prev, wb[next_break]);
        w_prev = wb[next_break];
      }
      ++next_break;
    }
    if (target > w_prev) {
      acc += piece(w_prev, target);
      w_prev = target;
    }
    out[idx] = a * std::pow(xs[idx] - 1.0, a) * acc;
  }
}

double integrate_row(const KernelSpec& spec, double x, double y0, double y1) {
  if (!(y1 > y0)) return 0.0;
  const Density& g = *spec.g;
  if (x <= 1.0) {
    const double lo = std::max(y0, 0.0) / x;
    const double hi = std::min(y1, x) / x;
    return hi > lo ? g.cdf(hi) - g.cdf(lo) : 0.0;
  }
  const KernelSpec inner = spec.with_tol(spec.quad_tol * 1e-2);
  const quad::Tolerance tol{spec.quad_tol, 0.0, 8000};
  auto R = [&](double y) { return transition_density(inner, x, y); };
  std::vector<double> kinks;
  for (double ub : g.breakpoints()) kinks.push_back(ub * x);
  double total = 0.0;
  // Below x: direct.
  const double lo = std::max(y0, 0.0);
  const double mid = std::min(y1, x);
  if (mid > lo) total += quad::integrate_pieces(R, frame(lo, mid, kinks), tol).value;
  // Above x: y = 1 + (x - 1) e^t resolves the decay on the scale of x - 1.
  const double hi_lo = std::max(lo, x);
  if (y1 > hi_lo) {
    auto to_t = [&](double y) { return std::log((y - 1.0) / (x - 1.0)); };
    std::vector<double> tk;
    for (double k : kinks) {
      if (k > hi_lo && k < y1) tk.push_back(to_t(k));
    }
    auto Rt = [&](double t) {
      const double d = (x - 1.0) * std::exp(t);
      return R(1.0 + d) * d;
    };
    total += quad::integrate_pieces(Rt, frame(to_t(hi_lo), to_t(y1), tk), tol).value;
  }
  return total;
}

namespace {

// int_1^inf f(x) dx for a column integrand with kinks at x = y and x = y/u_b.
template <class F>
double column_integral(F&& f, double y, const std::vector<double>& ubreaks, double tol_rel) {
  if (y <= 0.0) return 0.0;
  const quad::Tolerance tol{tol_rel, 0.0, 8000};
  std::vector<double> kinks;
  for (double ub : ubreaks) {
    if (ub > 0.0) kinks.push_back(y / ub);
  }
  double total = 0.0;
  // x in [1, x_split] directly, beyond it in t = log((x - 1) / (x_split - 1)).
  const double x_split = y > 1.0 ? y : 2.0;
  total += quad::integrate_pieces(f, frame(1.0, x_split, kinks), tol).value;
  const double base = x_split - 1.0;
  const double t_hi = std::log(1e12 * x_split / base);
  std::vector<double> tk;
  for (double k : kinks) {
    if (k > x_split) tk.push_back(std::log((k - 1.0) / base));
  }
  auto ft = [&](double t) {
    const double d = base * std::exp(t);
    return f(1.0 + d) * d;
  };
  total += quad::integrate_pieces(ft, frame(0.0, t_hi, tk), tol).value;
  return total;
}

}  // namespace

double integrate_column(const KernelSpec& spec, double y) {
  const KernelSpec inner = spec.with_tol(spec.quad_tol * 1e-2);
  auto f = [&](double x) { return x > 1.0 ? transition_density(inner, x, y) : 0.0; };
  return column_integral(f, y, spec.g->breakpoints(), spec.quad_tol);
}

double column_l1_difference(const KernelSpec& exact, const KernelSpec& estimate, double y) {
  const KernelSpec e_in = exact.with_tol(exact.quad_tol * 1e-2);
  const KernelSpec h_in = estimate.with_tol(estimate.quad_tol * 1e-2);
  auto f = [&](double x) {
    return x > 1.0 ? std::abs(transition_density(e_in, x, y) - transition_density(h_in, x, y)) : 0.0;
  };
  auto breaks = exact.g->breakpoints();
  const auto more = estimate.g->breakpoints();
  breaks.insert(breaks.end(), more.begin(), more.end());
  return column_integral(f, y, breaks, std::max(exact.quad_tol, 1e-7));
}

}  // namespace gfab
