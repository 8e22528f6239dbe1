#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfab::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Thrown when adaptive subdivision runs out of budget before reaching the
/// requested tolerance. Carries the best estimate and its error bound.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double estimate, double error_bound)
      : std::runtime_error(what + " (estimate " + std::to_string(estimate) +
                           ", error bound " + std::to_string(error_bound) + ")"),
        estimate_(estimate),
        error_bound_(error_bound) {}

  double estimate() const { return estimate_; }
  double error_bound() const { return error_bound_; }

 private:
  double estimate_;
  double error_bound_;
};

struct Tolerance {
  double rel = 1e-10;
  double abs = 0.0;
  int max_subdivisions = 4000;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK constants).
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1) gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) over the pieces delimited by
/// `breaks` (sorted, at least two entries). The integrand may have kinks or
/// jumps at the break points.
template <class F>
Result integrate_pieces(F&& f, std::span<const double> breaks, const Tolerance& tol = {}) {
  std::priority_queue<detail::Segment> heap;
  Result out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] > breaks[i])) continue;
    auto seg = detail::gk15(f, breaks[i], breaks[i + 1]);
    out.value += seg.value;
    out.error += seg.error;
    out.evaluations += 15;
    heap.push(seg);
  }
  int splits = 0;
  while (!heap.empty() && out.error > std::max(tol.abs, tol.rel * std::abs(out.value))) {
    if (splits >= tol.max_subdivisions) {
      throw QuadratureError("adaptive quadrature did not converge", out.value, out.error);
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval exhausted at machine resolution; accept what we have.
      break;
    }
    auto left = detail::gk15(f, worst.a, mid);
    auto right = detail::gk15(f, mid, worst.b);
    out.value += left.value + right.value - worst.value;
    out.error += left.error + right.error - worst.error;
    out.evaluations += 30;
    heap.push(left);
    heap.push(right);
    ++splits;
  }
  if (!std::isfinite(out.value)) {
    throw QuadratureError("non-finite integrand", out.value, out.error);
  }
  return out;
}

template <class F>
Result integrate(F&& f, double a, double b, const Tolerance& tol = {}) {
  const double breaks[2] = {a, b};
  return integrate_pieces(f, std::span<const double>(breaks, 2), tol);
}

/// Gauss-Legendre rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

Rule gauss_legendre(int points);

}  // namespace gfab::quad
