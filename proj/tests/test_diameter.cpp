#include <cmath>
#include <random>
#include <vector>

#include "concdiam/diameter.hpp"
#include "concdiam/errors.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace concdiam;

namespace {

FiniteMetricSpace scaled_space(const FiniteMetricSpace& s, double c) {
  Matrix m = s.metric();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= c;
  return {s.labels(), m, s.prob()};
}

FiniteMetricSpace four_point(double n) {
  const std::vector<double> x{-n, -1.0, 1.0, n};
  std::vector<double> w;
  double total = 0;
  for (double v : x) total += w.emplace_back(std::exp(-v * v));
  for (double& v : w) v /= total;
  return line_space(x, w);
}

using Atoms = std::vector<DiscreteDistribution::Atom>;

Atoms atoms_of(const DiscreteDistribution& d) { return {d.atoms().begin(), d.atoms().end()}; }

}  // namespace

TEST_CASE("symmetrized distance") {
  CHECK(atoms_of(symmetrized_distance(FiniteMetricSpace({"x"}, Matrix(1, 1), {1.0}))) ==
        Atoms{{0.0, 1.0}});
  CHECK(atoms_of(symmetrized_distance(equilateral_space(2))) ==
        Atoms{{-1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  for (std::size_t n : {3, 7, 50}) {
    const auto xi = symmetrized_distance(equilateral_space(n));
    REQUIRE(xi.size() == 3);
    const double nn = static_cast<double>(n);
    CHECK(xi.atoms()[0].value == -1.0);
    CHECK(xi.atoms()[0].prob == doctest::Approx((nn - 1) / (2 * nn)).epsilon(1e-12));
    CHECK(xi.atoms()[1].prob == doctest::Approx(1 / nn).epsilon(1e-12));
    CHECK(xi.atoms()[2].prob == doctest::Approx((nn - 1) / (2 * nn)).epsilon(1e-12));
  }
}

TEST_CASE("symmetrized distance is symmetric and centered") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const auto xi = symmetrized_distance(oracle::random_space(1 + trial % 12, rng));
    CHECK(xi.is_symmetric());
    CHECK(std::abs(xi.mean()) <= 1e-15);
  }
}

TEST_CASE("mgf_log") {
  const auto rad = DiscreteDistribution({{-1.0, 0.5}, {1.0, 0.5}});
  CHECK(mgf_log(rad, 0.0) == 0.0);
  CHECK(mgf_log(DiscreteDistribution::point_mass(0.0), 3.7) == 0.0);
  CHECK(mgf_log(rad, 1.0) == doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-15));
  CHECK(mgf_log(rad, 1.0) == doctest::Approx(0.4337808304).epsilon(1e-10));
  // lambda * v = 1000 would overflow a naive exponential.
  CHECK(mgf_log(rad, 1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
  CHECK(mgf_log(rad, -1000.0) == doctest::Approx(1000.0 - std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("sigma star") {
  CHECK(sigma_star(DiscreteDistribution::point_mass(0.0)).sigma_star == 0.0);
  const auto two = sigma_star(symmetrized_distance(equilateral_space(2)));
  // Frozen from the dense-grid oracle (10^6 points + golden section).
  CHECK(two.sigma_star == doctest::Approx(0.707106781186565).epsilon(1e-9));
  CHECK(two.sigma_star * two.sigma_star >= two.variance_limit - two.tolerance);
  CHECK(two.variance_limit == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(sigma_star(DiscreteDistribution({{1.0, 0.5}, {2.0, 0.5}})),
                       doctest::Contains("not centered"), DomainError);
}

TEST_CASE("sigma star of an asymmetric centered law matches the oracle") {
  // Centered but skewed: the sup sits at lambda > 0 away from zero.
  const DiscreteDistribution d({{-1.0, 0.9}, {9.0, 0.1}});
  oracle::Law law{{-1.0, 0.9L}, {9.0, 0.1L}};
  const auto est = sigma_star(d);
  CHECK(est.sigma_star == doctest::Approx(static_cast<double>(oracle::sigma_star(law))).epsilon(1e-9));
  CHECK(est.argmax_lambda > 0.0);
  CHECK(est.sigma_star * est.sigma_star > est.variance_limit);
  const auto flipped = sigma_star(d.reflected());
  CHECK(flipped.sigma_star == doctest::Approx(est.sigma_star).epsilon(1e-12));
  CHECK(flipped.argmax_lambda < 0.0);
}

TEST_CASE("subgaussian diameter closed forms") {
  CHECK(subgaussian_diameter(GaussianLineSpace(0.0, 1.0)).sigma_star ==
        doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(subgaussian_diameter(GaussianLineSpace(3.0, 0.5)).sigma_star ==
        doctest::Approx(0.5 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(subgaussian_diameter(FiniteMetricSpace({"x"}, Matrix(1, 1), {1.0})).sigma_star == 0.0);
}

TEST_CASE("four-point space stays below sqrt 2") {
  // Frozen oracle values.
  const std::vector<std::pair<double, double>> frozen{
      {5.0, 1.41421356301440}, {10.0, 1.41421356237372}, {50.0, 1.41421356237313}};
  for (const auto& [n, value] : frozen) {
    const double d = subgaussian_diameter(four_point(n)).sigma_star;
    CHECK(d == doctest::Approx(value).epsilon(1e-9));
    CHECK(d <= std::sqrt(2.0) + 1e-6);
  }
}

TEST_CASE("equilateral spaces increase towards 1") {
  const std::vector<std::pair<std::size_t, double>> frozen{{2, 0.707106781186565},
                                                           {5, 0.894427190999924},
                                                           {10, 0.948683298050514},
                                                           {100, 0.994987437106620},
                                                           {1000, 0.999499874937461}};
  double previous = 0.0;
  for (const auto& [n, value] : frozen) {
    const double d = subgaussian_diameter(equilateral_space(n)).sigma_star;
    CHECK(d == doctest::Approx(value).epsilon(1e-9));
    CHECK(d > previous);
    previous = d;
  }
  CHECK(previous > 0.9);
  CHECK(previous < 1.0);
}

TEST_CASE("random spaces: oracle agreement, diameter bound, certificate") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const auto s = oracle::random_space(2 + trial % 10, rng);
    const auto est = subgaussian_diameter(s);
    const double reference = static_cast<double>(oracle::sigma_star(oracle::symmetrized(s), 20000));
    CHECK(est.sigma_star == doctest::Approx(reference).epsilon(1e-7));
    CHECK(est.sigma_star <= metric_diameter(s) + 1e-6);
    CHECK(max_subgaussian_excess(symmetrized_distance(s), est.sigma_star) <= 1e-9);
  }
}

TEST_CASE("scale covariance") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = oracle::random_space(3 + trial % 5, rng);
    const auto t = scaled_space(s, 3.0);
    CHECK(subgaussian_diameter(t).sigma_star ==
          doctest::Approx(3.0 * subgaussian_diameter(s).sigma_star).epsilon(1e-9));
    CHECK(orlicz_p_diameter(t, 1.5) == doctest::Approx(3.0 * orlicz_p_diameter(s, 1.5)).epsilon(1e-8));
  }
}

TEST_CASE("orlicz diameter") {
  const auto two = equilateral_space(2);
  const auto single = FiniteMetricSpace({"x"}, Matrix(1, 1), {1.0});
  CHECK(orlicz_p_diameter(two, 2.0) == doctest::Approx(subgaussian_diameter(two).sigma_star).epsilon(1e-8));
  for (double p : {1.2, 2.0, 3.0}) CHECK(orlicz_p_diameter(single, p) == 0.0);
  // Near lambda = 0 the log-MGF is quadratic, which no |lambda|^p with p > 2
  // can dominate.
  CHECK(std::isinf(orlicz_p_diameter(two, 3.0)));
  // Frozen oracle values for p = 1.5.
  CHECK(orlicz_p_diameter(two, 1.5) == doctest::Approx(0.628263112797493).epsilon(1e-9));
  const std::vector<double> x{0, 1, 2};
  CHECK(orlicz_p_diameter(line_space(x, {1. / 3, 1. / 3, 1. / 3}), 1.5) ==
        doctest::Approx(1.08469747751890).epsilon(1e-9));
  CHECK_THROWS_WITH_AS(orlicz_p_diameter(two, 1.0), "p must exceed 1", DomainError);
}

TEST_CASE("conditional diameters") {
  const auto two = equilateral_space(2);
  SUBCASE("product chain reduces to the marginal") {
    const MarkovProcessSpec chain(two, {0.5, 0.5}, Matrix::from_rows({{0.5, 0.5}, {0.5, 0.5}}), 4);
    const double d = subgaussian_diameter(two).sigma_star;
    for (double v : conditional_subgaussian_diameters(chain)) CHECK(v == doctest::Approx(d).epsilon(1e-12));
  }
  SUBCASE("horizon 1") {
    const MarkovProcessSpec chain(two, {0.5, 0.5}, Matrix::from_rows({{1, 0}, {0, 1}}), 1);
    const auto d = conditional_subgaussian_diameters(chain);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == doctest::Approx(subgaussian_diameter(two).sigma_star).epsilon(1e-12));
  }
  SUBCASE("identity transitions") {
    const MarkovProcessSpec chain(two, {0.5, 0.5}, Matrix::from_rows({{1, 0}, {0, 1}}), 3);
    const auto d = conditional_subgaussian_diameters(chain);
    CHECK(d[0] == doctest::Approx(0.707106781186565).epsilon(1e-9));
    CHECK(d[1] == 0.0);
    CHECK(d[2] == 0.0);
  }
}

TEST_CASE("conditional diameters skip unreachable states") {
  // State c is never reached; its spread-out row must not count.
  const auto three = equilateral_space(3);
  const MarkovProcessSpec chain(three, {1, 0, 0},
                                Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {1. / 3, 1. / 3, 1. / 3}}), 3);
  const auto d = conditional_subgaussian_diameters(chain);
  CHECK(d[0] == 0.0);
  CHECK(d[1] == 0.0);
  CHECK(d[2] == 0.0);
}
