#include <doctest.h>

#include <cmath>
#include <vector>

#include "gfab/estimators.hpp"
#include "gfab/kernel.hpp"
#include "oracles.hpp"

using namespace gfab;

namespace {

KernelSpec reference(double tol = 1e-10) { return KernelSpec{1.0, 1.0, make_power_density(10.0), tol}; }

DensityPtr uniform_half() {
  return std::make_shared<CallableDensity>([](double u) { return u >= 0.5 && u <= 1.0 ? 2.0 : 0.0; },
                                           std::vector<double>{0.5}, "uniform[1/2,1]");
}

}  // namespace

TEST_CASE("inner integral edge cases") {
  const auto spec = reference();
  CHECK(beta_integral(spec, 2.0, 0.0) == 0.0);
  CHECK(beta_integral(spec, 1.0, 1.5) > 0.0);
  CHECK_THROWS_AS(beta_integral(spec, 0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(beta_integral(spec, 1.0, 0.5), std::domain_error);
}

TEST_CASE("inner integral against a brute-force midpoint rule") {
  const auto spec = reference();
  auto f = [](double u) { return 11.0 * std::pow(u, 10.0) * u / ((2.0 - u) * (2.0 - u)); };
  const double brute = oracle::midpoint(f, 0.0, 1.0, 1000000);
  CHECK(beta_integral(spec, 2.0, 2.0) == doctest::Approx(brute).epsilon(1e-4));

  // y/x < 1 and a non-integer exponent.
  const KernelSpec s2{1.3, 0.7, make_power_density(3.5), 1e-10};
  const double a = s2.ratio();
  auto f2 = [a](double u) { return 4.5 * std::pow(u, 3.5) * std::pow(u, a) * std::pow(1.4 - u, -a - 1.0); };
  CHECK(beta_integral(s2, 3.0, 1.4) == doctest::Approx(oracle::midpoint(f2, 0.0, 1.4 / 3.0, 1000000)).epsilon(1e-6));
}

TEST_CASE("transition density on the frozen branch") {
  const auto spec = reference();
  CHECK(transition_density(spec, 0.5, 0.25) == doctest::Approx(11.0 / 512.0).epsilon(1e-14));
  CHECK(transition_density(spec, 0.5, 0.75) == 0.0);
}

TEST_CASE("transition density agrees with the mixture representation") {
  for (const auto& spec : {reference(), KernelSpec{0.8, 1.7, make_power_density(4.0), 1e-10},
                           KernelSpec{1.5, 1.0, uniform_half(), 1e-10}}) {
    for (double x : {1.01, 1.2, 2.0, 5.0}) {
      for (double y : {0.3, 0.95, 1.0, 1.1, 1.9, 2.0, 3.5, 7.0}) {
        const double want = oracle::kernel_density(*spec.g, spec.lambda, spec.r, x, y);
        CHECK(std::abs(transition_density(spec, x, y) - want) <= 1e-8 * want + 1e-14);
      }
    }
  }
}

TEST_CASE("column sweep matches pointwise evaluation") {
  for (const auto& spec : {reference(1e-12), KernelSpec{1.5, 1.0, uniform_half(), 1e-12}}) {
    std::vector<double> xs;
    for (int i = 0; i < 60; ++i) xs.push_back(1.0 + 1e-4 * std::pow(1e7, i / 59.0));
    std::vector<double> out(xs.size());
    for (double y : {0.01, 0.5, 0.999, 1.00005, 1.3, 2.0, 40.0, 900.0}) {
      transition_density_column(spec, y, xs, out);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double want = transition_density(spec, xs[i], y);
        CHECK(std::abs(out[i] - want) <= 1e-9 * want + 1e-16);
      }
    }
  }
}

TEST_CASE("rows are probability densities") {
  const auto spec = reference();
  for (double x : {1.5, 2.0, 5.0}) {
    const double Y = 1.0 + (x - 1.0) * 1e4;  // tail mass bound 1e-4
    const double body = integrate_row(spec, x, 0.0, Y);
    const double tail = oracle::row_tail(*spec.g, spec.lambda, spec.r, x, Y);
    CHECK(body + tail == doctest::Approx(1.0).epsilon(10 * spec.quad_tol));
    CHECK(tail <= tail_mass_bound(x, Y, spec.lambda, spec.r));
    CHECK(integrate_row(spec, x, 0.0, 1.0) ==
          doctest::Approx(oracle::absorb_in_one(*spec.g, 1.0, 1.0, x)).epsilon(1e-9));
  }
  // x <= 1: all mass below x.
  CHECK(integrate_row(spec, 0.8, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("row through x = 2 peaks at y = 2") {
  const auto spec = reference();
  double best_y = 0.0, best = -1.0;
  for (int i = 0; i <= 300; ++i) {
    const double y = 1.0 + 3.0 * i / 300.0;
    const double v = transition_density(spec, 2.0, y);
    if (v > best) {
      best = v;
      best_y = y;
    }
  }
  CHECK(best_y == doctest::Approx(2.0).epsilon(0.02));
  // Kink: one-sided slopes differ in sign.
  const double h = 1e-4;
  const double left = (transition_density(spec, 2.0, 2.0) - transition_density(spec, 2.0, 2.0 - h)) / h;
  const double right = (transition_density(spec, 2.0, 2.0 + h) - transition_density(spec, 2.0, 2.0)) / h;
  CHECK(left > 0.0);
  CHECK(right < 0.0);
}

TEST_CASE("tail mass bound") {
  CHECK(tail_mass_bound(1.0, 5.0, 1.0, 1.0) == 0.0);
  CHECK(tail_mass_bound(1.0 + 1e-12, 5.0, 1.0, 1.0) < 1e-12);
  CHECK(tail_mass_bound(2.0, 101.0, 1.0, 1.0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(tail_mass_bound(2.0, 101.0, 2.0, 2.0) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK_THROWS(tail_mass_bound(3.0, 2.0, 1.0, 1.0));
  const auto spec = reference(1e-9);
  CHECK(integrate_row(spec, 2.0, 101.0, 1e6) <= 0.01);
}

TEST_CASE("uniform error bound formula") {
  CHECK(sup_error_bound(0.0, 3.0, 0.0, 0.5, 2.0) == 0.0);
  CHECK(sup_error_bound(0.1, 7.0, 0.0, 0.5, 2.0) == 0.1);
  CHECK(sup_error_bound(0.0, 1.0, 1.0, 1.0, 1.0) == doctest::Approx(4.0 / M_E + 1.0));
  CHECK_THROWS(sup_error_bound(0.0, 1.0, 1.0, 0.0, 1.0));
}

TEST_CASE("unweighted inner integral stays below 1/lambda") {
  CHECK(f_lambda(1.0, 1.0, 2.0, 0.0) == 0.0);
  const double v = f_lambda(1.0, 1.0, 2.0, 3.0);
  CHECK(v <= 1.0 / 6.0);
  CHECK(v > 0.0);
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const double lambda = 0.05 + 5.0 * rng.uniform();
    const double r = 0.05 + 5.0 * rng.uniform();
    const double x = 1.0 + std::exp(-8.0 + 14.0 * rng.uniform());
    const double y = std::exp(-5.0 + 10.0 * rng.uniform());
    const double f = f_lambda(lambda, r, x, y);
    const double a = lambda / r;
    const double middle = y < x ? (1.0 - std::pow((x - 1.0) / x, a)) / lambda
                                : (std::pow((x - 1.0) / (y - 1.0), a) - std::pow((x - 1.0) / y, a)) / lambda;
    CHECK(f >= 0.0);
    CHECK(f <= 1.0 / lambda);
    CHECK(f <= middle * (1.0 + 1e-9) + 1e-300);
  }
}

TEST_CASE("column mass equals the weighted mean of G(u)/u") {
  const auto spec = reference();
  const double kappa = 0.5 * 1.1;
  for (double y : {1.0001, 1.5, 2.0, 10.0, 100.0}) {
    CHECK(integrate_column(spec, y) == doctest::Approx(kappa).epsilon(10 * spec.quad_tol));
  }
  // Below 1 the column mass is smaller.
  CHECK(integrate_column(spec, 0.9) < kappa);
  const KernelSpec alt{2.0, 1.0, uniform_half(), 1e-10};
  const double kalt = 2.0 / 3.0 * 2.0 * std::log(2.0);
  for (double y : {1.2, 3.0, 50.0}) CHECK(integrate_column(alt, y) == doctest::Approx(kalt).epsilon(1e-9));
}

TEST_CASE("column L1 distance is bounded by density and rate errors") {
  const auto spec = reference(1e-9);
  auto g = make_power_density(10.0);
  Rng rng(41);
  std::vector<double> s(100), y(100);
  for (int i = 0; i < 100; ++i) {
    s[i] = rng.exponential(1.0);
    y[i] = g->sample(rng);
  }
  const auto lam = estimate_lambda_tmle(s, 0.5, 2.0);
  const auto hat = KdeEstimate::fit(y).exact_density();
  const KernelSpec est{lam.value, 1.0, hat, 1e-9};
  const double rhs = column_l1_bound(weighted_l1_diagnostic(*hat, g.get(), 1e-9), weighted_l1_diagnostic(*hat, nullptr, 1e-9),
                                     1.0, lam.value, 1.0, 0.5, 2.0);
  for (double yy : {0.5, 1.0001, 1.5, 2.0, 5.0}) CHECK(column_l1_difference(spec, est, yy) <= rhs);
}

TEST_CASE("plug-in kernel with exact inputs is the exact kernel") {
  const auto spec = reference();
  const KernelSpec same{1.0, 1.0, std::make_shared<PowerDensity>(10.0), 1e-10};
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double x = 0.5 + 3.5 * i / 20.0, y = 4.0 * j / 20.0;
      CHECK(std::abs(transition_density(spec, x, y) - transition_density(same, x, y)) <= 1e-10);
    }
  }
}
