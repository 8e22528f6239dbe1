#include <doctest.h>

#include <cmath>

#include "gfab/fredholm.hpp"
#include "gfab/mc_oracle.hpp"

using namespace gfab;

TEST_CASE("start just above the boundary is absorbed almost surely") {
  ModelParams p;
  Rng rng(1);
  const auto rep = mc_absorption(p, 1.0 + 1e-12, 200, 20000, rng);
  CHECK(rep.p_hat > 0.999);
}

TEST_CASE("counts are consistent") {
  ModelParams p;
  Rng rng(2);
  const auto rep = mc_absorption(p, 1.3, 30, 50000, rng);
  std::uint64_t total = 0;
  for (auto c : rep.jump_hist) total += c;
  CHECK(rep.p_hat == static_cast<double>(total) / 50000.0);
  CHECK(rep.p_hat + rep.truncated_frac == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rep.jump_hist.size() == 30);
  CHECK(rep.se == doctest::Approx(std::sqrt(rep.p_hat * (1 - rep.p_hat) / 50000.0)));
  const auto j = rep.to_json();
  CHECK(j["jump_hist"].size() == 30);
  CHECK_THROWS(mc_absorption(p, 0.9, 10, 10, rng));
}

TEST_CASE("one-jump frequency matches the source term") {
  ModelParams p;
  const FredholmSolver s(KernelSpec{1.0, 1.0, p.g, 1e-8});
  for (double x0 : {1.1, 2.0}) {
    Rng rng(3);
    const auto rep = mc_absorption(p, x0, 1, 1000000, rng);
    const double t1 = integrate_row(KernelSpec{1.0, 1.0, p.g, 1e-10}, x0, 0.0, 1.0);
    CHECK(std::abs(rep.freq(1) - t1) <= 3.0 * std::sqrt(t1 * (1 - t1) / 1e6));
  }
}

TEST_CASE("replay and thread independence") {
  ModelParams p;
  Rng a(9), b(9), c(9);
  const auto ra = mc_absorption(p, 1.5, 12, 200000, a, McOptions{4096, 1});
  const auto rb = mc_absorption(p, 1.5, 12, 200000, b, McOptions{4096, 1});
  const auto rc = mc_absorption(p, 1.5, 12, 200000, c, McOptions{4096, 4});
  CHECK(ra.jump_hist == rb.jump_hist);
  CHECK(ra.jump_hist == rc.jump_hist);
  CHECK(ra.to_json().dump() == rc.to_json().dump());
}
