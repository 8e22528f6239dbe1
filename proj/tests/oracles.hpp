#pragma once

// Reference computations that avoid the library's quadrature and kernel code.

#include <cmath>
#include <algorithm>
#include <functional>
#include <vector>

#include "gfab/density.hpp"

namespace oracle {

// Adaptive Simpson with Richardson correction.
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                          double fb, double whole, double eps, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

inline double simpson(const std::function<double(double)>& f, double a, double b, double eps = 1e-12,
                      int depth = 50) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, eps, depth);
}

// Simpson over consecutive pieces.
inline double simpson_pieces(const std::function<double(double)>& f, std::initializer_list<double> cuts,
                             double eps = 1e-12) {
  double total = 0.0;
  const double* prev = nullptr;
  for (const double& c : cuts) {
    if (prev && c > *prev) total += simpson(f, *prev, c, eps);
    prev = &c;
  }
  return total;
}

// Z_1 = Phi(x, S) Y with P = exp(-lambda S) uniform on (0, 1):
// Phi = 1 + (x - 1) P^(-r/lambda). Everything below integrates over P in
// log scale, q = -log P, with density e^-q.
inline double phi_of_q(double x, double q, double lambda, double r) { return 1.0 + (x - 1.0) * std::exp(q * r / lambda); }

// Density of Z_1 at y: E[g(y / Phi) / Phi].
inline double kernel_density(const gfab::Density& g, double lambda, double r, double x, double y) {
  auto f = [&](double q) {
    const double z = phi_of_q(x, q, lambda, r);
    return std::exp(-q) * g.eval(y / z) / z;
  };
  // Below q_y, Phi < y and g(y/Phi) vanishes. Kinks of g move to q where y/Phi hits them.
  const double qy = y > x ? lambda / r * std::log((y - 1.0) / (x - 1.0)) : 0.0;
  std::vector<double> cuts{qy};
  std::vector<double> bps = g.breakpoints();
  for (double u : bps) {
    if (!(u > 0.0 && u < 1.0)) continue;
    const double z = y / u;
    if (z > 1.0 && x > 1.0) {
      const double q = lambda / r * std::log((z - 1.0) / (x - 1.0));
      if (q > qy) cuts.push_back(q);
    }
  }
  for (double d : {1.0, 5.0, 20.0, 60.0}) cuts.push_back(qy + d);
  std::sort(cuts.begin(), cuts.end());
  auto run = [&](double eps) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i]) total += simpson(f, cuts[i], cuts[i + 1], eps);
    return total;
  };
  const double rough = run(1e-13);
  return rough > 0.0 ? run(std::max(rough * 1e-12, 1e-300)) : rough;
}

// P(Z_1 <= 1) = E[F(1 / Phi)].
inline double absorb_in_one(const gfab::Density& g, double lambda, double r, double x) {
  auto f = [&](double q) { return std::exp(-q) * g.cdf(1.0 / phi_of_q(x, q, lambda, r)); };
  return simpson_pieces(f, {0.0, 1.0, 5.0, 20.0, 60.0}, 1e-14);
}

// P(Z_1 > y_max) = E[1 - F(y_max / Phi)], only Phi > y_max contributes.
inline double row_tail(const gfab::Density& g, double lambda, double r, double x, double y_max) {
  const double q0 = lambda / r * std::log((y_max - 1.0) / (x - 1.0));
  auto f = [&](double q) { return std::exp(-q) * (1.0 - g.cdf(y_max / phi_of_q(x, q, lambda, r))); };
  return simpson_pieces(f, {q0, q0 + 1.0, q0 + 5.0, q0 + 20.0, q0 + 60.0}, 1e-15);
}

// Midpoint rule with `n` cells.
inline double midpoint(const std::function<double(double)>& f, double a, double b, long n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.0;
  for (long i = 0; i < n; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
  return s * h;
}

}  // namespace oracle
