#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "concdiam/bounds.hpp"
#include "concdiam/errors.hpp"
#include "doctest.h"

using namespace concdiam;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

std::vector<double> grid(double hi, std::size_t points) {
  std::vector<double> t(points);
  for (std::size_t k = 0; k < points; ++k) t[k] = hi * static_cast<double>(k) / static_cast<double>(points - 1);
  return t;
}

}  // namespace

TEST_CASE("mcdiarmid") {
  const std::vector<double> w{1, 1};
  CHECK(mcdiarmid_bound(w, 0) == 1.0);
  for (std::size_t n : {1, 4, 25}) {
    const std::vector<double> ones(n, 1.0);
    for (double eps : {0.1, 0.5, 1.0}) {
      const double t = static_cast<double>(n) * eps;
      CHECK(mcdiarmid_bound(ones, t) ==
            doctest::Approx(std::min(1.0, 2 * std::exp(-2.0 * static_cast<double>(n) * eps * eps)))
                .epsilon(1e-14));
    }
  }
  CHECK_THROWS_WITH_AS(mcdiarmid_bound(std::vector<double>{1, kInf}, 1),
                       "metric diameter unbounded; McDiarmid inapplicable", DomainError);
  CHECK_THROWS_AS(mcdiarmid_bound(std::vector<double>{1, 0}, 1), DomainError);
  CHECK_THROWS_AS(mcdiarmid_bound(w, -1), DomainError);
}

TEST_CASE("subgaussian") {
  const std::vector<double> one{std::sqrt(2.0)};
  CHECK(subgaussian_bound(one, 0) == 1.0);
  CHECK(subgaussian_bound(one, 2) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-14));
  for (std::size_t n : {10, 100}) {
    const double nn = static_cast<double>(n);
    const std::vector<double> deltas(n, std::sqrt(2.0) / nn);
    for (double eps : {0.1, 0.3, 1.0}) {
      CHECK(subgaussian_bound(deltas, eps) ==
            doctest::Approx(std::min(1.0, 2 * std::exp(-nn * eps * eps / 4))).epsilon(1e-12));
    }
  }
  const std::vector<double> zeros{0, 0};
  CHECK(subgaussian_bound(zeros, 0) == 1.0);
  CHECK(subgaussian_bound(zeros, 1e-9) == 0.0);
}

TEST_CASE("mixing") {
  const std::vector<double> d{1, 1}, tau{0.5, 0};
  CHECK(mixing_bound(d, tau, 2.5) == doctest::Approx(2 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(mixing_bound(d, tau, 0.5) == 1.0);
  CHECK(mixing_bound(d, tau, 0.2) == 1.0);
  CHECK_THROWS_AS(mixing_bound(d, std::vector<double>{0.5}, 1), DomainError);
}

TEST_CASE("orlicz") {
  const std::vector<double> one{1.0};
  CHECK(orlicz_bound(one, 3, 0) == 1.0);
  CHECK(orlicz_bound(one, 3, 8) ==
        doctest::Approx(2 * std::exp(-(2.0 / 3.0) * std::pow(8.0, 1.5))).epsilon(1e-12));
  CHECK(orlicz_bound(std::vector<double>{1, kInf}, 1.5, 100) == 1.0);
  CHECK_THROWS_WITH_AS(orlicz_bound(one, 1.0, 1), "p must exceed 1", DomainError);
}

TEST_CASE("stability") {
  CHECK(stability_bias_bound(0, 1) == 0.0);
  CHECK(stability_bias_bound(1, 0) == 0.0);
  for (double n : {1.0, 10.0, 1000.0}) {
    CHECK(stability_bias_bound(1 / n, std::sqrt(2.0)) == doctest::Approx(1 / (n * n)).epsilon(1e-12));
  }
  CHECK(stability_excess_risk_bound(1, 1, 1, 0) == 1.0);
  CHECK(stability_excess_risk_bound(1, 1, 1, std::sqrt(18.0)) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  // beta = 1/n gives exponent -n eps^2 / (18 Delta^2).
  CHECK(stability_excess_risk_bound(0.01, 2, 100, 3) ==
        doctest::Approx(std::exp(-100.0 * 9 / (18.0 * 4))).epsilon(1e-12));
  CHECK_THROWS_AS(stability_excess_risk_bound(0, 1, 1, 1), DomainError);
  CHECK_THROWS_AS(stability_excess_risk_bound(1, 0, 1, 1), DomainError);
  CHECK_THROWS_AS(stability_excess_risk_bound(1, 1, 0, 1), DomainError);
}

TEST_CASE("bounds are probabilities and nonincreasing in t") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> d(1 + trial % 6), tau(d.size());
    for (auto& v : d) v = u(rng);
    for (auto& v : tau) v = u(rng) / 4;
    tau.back() = 0;
    const double p = 1.1 + u(rng);
    double prev[4] = {2, 2, 2, 2};
    for (double t : grid(10, 200)) {
      const double now[4] = {mcdiarmid_bound(d, t), subgaussian_bound(d, t), mixing_bound(d, tau, t),
                             orlicz_bound(d, p, t)};
      for (int k = 0; k < 4; ++k) {
        CHECK(now[k] >= 0.0);
        CHECK(now[k] <= 1.0);
        CHECK(now[k] <= prev[k]);
        prev[k] = now[k];
      }
      // Same widths: the subgaussian form is the weaker of the two.
      CHECK(subgaussian_bound(d, t) >= mcdiarmid_bound(d, t));
    }
  }
}

TEST_CASE("reductions hold to 1e-12") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> d(1 + trial % 5);
    for (auto& v : d) v = u(rng);
    const std::vector<double> zero(d.size(), 0.0);
    for (double t : grid(8, 100)) {
      const double sg = subgaussian_bound(d, t);
      CHECK(mixing_bound(d, zero, t) == doctest::Approx(sg).epsilon(1e-12));
      CHECK(orlicz_bound(d, 2.0, t) == doctest::Approx(sg).epsilon(1e-12));
    }
  }
}

TEST_CASE("TailBound") {
  SUBCASE("Lipschitz scaling") {
    const TailBound b(BoundKind::subgaussian, {.deltas = {1.0}});
    const auto b3 = b.scaled(3);
    CHECK(b3.lipschitz() == 3.0);
    for (double t : {0.0, 0.5, 3.0, 9.0}) CHECK(b3(t) == doctest::Approx(b(t / 3)).epsilon(1e-15));
    CHECK_THROWS_AS(b(-1), DomainError);
    CHECK_THROWS_AS(b(std::nan("")), DomainError);
  }
  SUBCASE("kinds") {
    CHECK(TailBound(BoundKind::mixing, {.deltas = {1, 1}, .tau_bar = {0.5, 0}})(2.5) ==
          doctest::Approx(2 * std::exp(-1.0)));
    CHECK(TailBound(BoundKind::orlicz, {.deltas = {1}, .p = 3})(8) ==
          doctest::Approx(orlicz_bound(std::vector<double>{1}, 3, 8)));
    CHECK(TailBound(BoundKind::stability, {.beta = 1, .delta_sg = 1, .n = 1})(std::sqrt(18.0)) ==
          doctest::Approx(std::exp(-1.0)));
    CHECK_THROWS_AS(TailBound(BoundKind::mixing, {.deltas = {1, 1}, .tau_bar = {0.5}}), DomainError);
    CHECK_THROWS_AS(TailBound(BoundKind::stability, {.beta = 0, .delta_sg = 1}), DomainError);
    CHECK_THROWS_AS(TailBound(BoundKind::subgaussian, {.deltas = {1}}, -1.0), DomainError);
  }
  SUBCASE("names") {
    for (auto k : {BoundKind::mcdiarmid, BoundKind::subgaussian, BoundKind::mixing, BoundKind::orlicz,
                   BoundKind::stability}) {
      CHECK(bound_kind_from_string(to_string(k)) == k);
    }
    CHECK_THROWS_AS(bound_kind_from_string("hoeffding"), ValidationError);
  }
}

TEST_CASE("lipschitz check") {
  const FiniteMetricSpace two({"a", "b"}, Matrix::from_rows({{0, 1}, {1, 0}}), {0.5, 0.5});
  SUBCASE("constant statistic") {
    const auto spec = ProductSpec::power(two, 3);
    for (double L : {0.0, 1.0}) {
      const auto r = lipschitz_check(spec, [](Coordinates) { return 4.0; }, L, 100, 1);
      CHECK(r.passed);
      CHECK(r.exhaustive);
      CHECK(r.worst_ratio == 0.0);
      CHECK(r.pairs_checked == 8 * 7 / 2);
    }
  }
  SUBCASE("sum on the Gaussian line") {
    const auto spec = ProductSpec::power(GaussianLineSpace(0, 1), 5);
    const auto r = lipschitz_check(
        spec,
        [](Coordinates x) {
          double s = 0;
          for (double v : x) s += v;
          return s;
        },
        1.0, 5000, 7);
    CHECK(r.passed);
    CHECK_FALSE(r.exhaustive);
    CHECK(r.pairs_checked == 5000);
    CHECK(r.worst_ratio <= 1.0 + 1e-12);
    // Single-coordinate moves attain equality.
    CHECK(r.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("violation") {
    const auto spec = ProductSpec::power(two, 2);
    const auto r = lipschitz_check(spec, [](Coordinates x) { return 2.0 * x[0]; }, 1.0, 100, 3);
    CHECK_FALSE(r.passed);
    CHECK(r.worst_ratio == doctest::Approx(2.0));
    REQUIRE(r.violation);
    CHECK(r.violation->first[0] != r.violation->second[0]);
    // The same statistic passes at its true constant.
    CHECK(lipschitz_check(spec, [](Coordinates x) { return 2.0 * x[0]; }, 2.0, 100, 3).passed);
  }
  SUBCASE("thread count does not matter") {
    const auto spec = ProductSpec::power(GaussianLineSpace(0, 1), 3);
    auto phi = [](Coordinates x) { return std::abs(x[0]) + 0.5 * x[1] * x[1]; };
    const auto a = lipschitz_check(spec, phi, 1.0, 3000, 9, 1);
    const auto b = lipschitz_check(spec, phi, 1.0, 3000, 9, 6);
    CHECK(a.worst_ratio == b.worst_ratio);
    CHECK(a.passed == b.passed);
    CHECK_FALSE(a.passed);
  }
}
