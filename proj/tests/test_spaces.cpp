#include <random>
#include <string>
#include <vector>

#include "concdiam/diagnostics.hpp"
#include "concdiam/errors.hpp"
#include "concdiam/spaces.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace concdiam;

namespace {

const char* kTwoPoint =
    R"({"type":"finite","labels":["a","b"],"metric":[[0,1],[1,0]],"prob":[0.5,0.5]})";

std::string error_of(const std::string& doc) {
  try {
    load_space(doc);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("two-point document loads") {
  const auto s = load_space(kTwoPoint);
  const auto& f = std::get<FiniteMetricSpace>(s);
  CHECK(f.size() == 2);
  CHECK(f.distance(0, 1) == 1.0);
  CHECK(f.prob() == std::vector<double>{0.5, 0.5});
  CHECK(f.index_of("b") == 1);
}

TEST_CASE("probability sum is reported") {
  const auto msg = error_of(
      R"({"type":"finite","labels":["a","b"],"metric":[[0,1],[1,0]],"prob":[0.5,0.6]})");
  CHECK(msg.find("probabilities sum to 1.1") != std::string::npos);
  CHECK_THROWS_AS(load_space(R"({"type":"finite","labels":["a","b"],"metric":[[0,1],[1,0]],"prob":[0.5,0.6]})"),
                  ValidationError);
}

TEST_CASE("gaussian shorthand") {
  const auto s = load_space(R"({"gaussian":{"mean":0,"stddev":1}})");
  CHECK(std::get<GaussianLineSpace>(s) == GaussianLineSpace(0.0, 1.0));
  CHECK(std::get<GaussianLineSpace>(load_space(R"({"type":"gaussian","mean":0.0,"stddev":1.0})")) ==
        GaussianLineSpace(0.0, 1.0));
}

TEST_CASE("metric invariants are named") {
  auto finite = [](const std::string& metric, const std::string& prob = "[0.5,0.5]") {
    return R"({"type":"finite","labels":["a","b"],"metric":)" + metric + R"(,"prob":)" + prob + "}";
  };
  CHECK(error_of(finite("[[0,1],[2,0]]")).find("not symmetric") != std::string::npos);
  CHECK(error_of(finite("[[0.5,1],[1,0]]")).find("diagonal") != std::string::npos);
  CHECK(error_of(finite("[[0,0],[0,0]]")).find("positive off the diagonal") != std::string::npos);
  CHECK(error_of(finite("[[0,1],[1,0]]", "[-0.5,1.5]")).find("index 0") != std::string::npos);
  CHECK(error_of(R"({"type":"finite","labels":["a","b","c"],
                     "metric":[[0,1,5],[1,0,1],[5,1,0]],"prob":[0.3,0.3,0.4]})")
            .find("triangle") != std::string::npos);
  CHECK(error_of(R"({"type":"finite","labels":["a","a"],"metric":[[0,1],[1,0]],"prob":[0.5,0.5]})")
            .find("duplicate") != std::string::npos);
}

TEST_CASE("malformed documents are parse errors") {
  CHECK_THROWS_AS(load_space("{"), ParseError);
  CHECK_THROWS_AS(load_space("[]"), ParseError);
  CHECK_THROWS_AS(load_space(R"({"type":"torus"})"), ParseError);
  CHECK_THROWS_AS(load_space(R"({"type":"finite","labels":["a"],"metric":"x","prob":[1]})"), ParseError);
}

TEST_CASE("markov rows must be stochastic") {
  const std::string doc = R"({"type":"markov","states":)" + std::string(kTwoPoint) +
                          R"(,"initial":[0.5,0.5],"transition":[[0.5,0.6],[0,1]],"horizon":3})";
  CHECK(error_of(doc).find("sum to 1.1") != std::string::npos);
}

TEST_CASE("probabilities within tolerance are accepted") {
  const auto s = load_space(
      R"({"type":"finite","labels":["a","b","c"],"metric":[[0,1,1],[1,0,1],[1,1,0]],
          "prob":[0.333333333333333,0.333333333333333,0.333333333333334]})");
  double sum = 0;
  for (double p : std::get<FiniteMetricSpace>(s).prob()) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("zero-probability points warn") {
  std::vector<std::string> seen;
  auto previous = diag::set_sink([&](diag::Level, std::string_view m) { seen.emplace_back(m); });
  const auto s = load_space(
      R"({"type":"finite","labels":["a","b"],"metric":[[0,1],[1,0]],"prob":[1,0]})");
  diag::set_sink(previous);
  CHECK(std::get<FiniteMetricSpace>(s).size() == 2);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].find("zero probability") != std::string::npos);
}

TEST_CASE("product distance") {
  const auto two = std::get<FiniteMetricSpace>(load_space(kTwoPoint));
  const auto spec = ProductSpec::power(two, 2);
  const std::vector<std::string> aa{"a", "a"}, bb{"b", "b"}, ab{"a", "b"};
  CHECK(product_distance(spec, aa, aa) == 0.0);
  CHECK(product_distance(spec, aa, bb) == 2.0);
  CHECK(product_distance(spec, ab, bb) == 1.0);
  const std::vector<std::string> short_tuple{"a"}, unknown{"a", "z"};
  CHECK_THROWS_AS(product_distance(spec, short_tuple, aa), ValidationError);
  CHECK_THROWS_AS(product_distance(spec, unknown, aa), ValidationError);
}

TEST_CASE("product distance is a metric on random tuples") {
  std::mt19937_64 rng(5);
  std::vector<Component> parts;
  for (std::size_t k = 0; k < 4; ++k) parts.emplace_back(oracle::random_space(3 + k, rng));
  parts.emplace_back(GaussianLineSpace(0.0, 2.0));
  const ProductSpec spec(parts);
  std::normal_distribution<double> g;
  auto draw = [&] {
    std::vector<double> x;
    for (std::size_t k = 0; k < 4; ++k) x.push_back(static_cast<double>(rng() % (3 + k)));
    x.push_back(g(rng));
    return x;
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto x = draw(), y = draw(), z = draw();
    CHECK(spec.distance(x, x) == 0.0);
    CHECK(spec.distance(x, y) == spec.distance(y, x));
    CHECK(spec.distance(x, z) <= spec.distance(x, y) + spec.distance(y, z) + 1e-12);
    if (x != y) CHECK(spec.distance(x, y) > 0.0);
  }
}

TEST_CASE("metric diameter") {
  CHECK(metric_diameter(FiniteMetricSpace({"x"}, Matrix(1, 1), {1.0})) == 0.0);
  CHECK(metric_diameter(std::get<FiniteMetricSpace>(load_space(kTwoPoint))) == 1.0);
  for (std::size_t n : {2, 3, 17, 100}) CHECK(metric_diameter(equilateral_space(n)) == 1.0);
  CHECK(std::isinf(metric_diameter(Component(GaussianLineSpace(0, 1)))));
}

TEST_CASE("loaded metrics satisfy the triangle inequality") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_space(2 + trial % 9, rng);
    const auto loaded = std::get<FiniteMetricSpace>(load_space(serialize_space(s)));
    const std::size_t n = loaded.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          CHECK(loaded.distance(i, j) <= loaded.distance(i, k) + loaded.distance(k, j) + 1e-12);
  }
}

TEST_CASE("finite spaces round-trip bit-identically") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_space(1 + trial % 12, rng);
    const auto once = std::get<FiniteMetricSpace>(load_space(serialize_space(s)));
    const auto twice = std::get<FiniteMetricSpace>(load_space(serialize_space(once)));
    CHECK(once == s);
    CHECK(twice == once);
    CHECK(serialize_space(twice) == serialize_space(once));
  }
}

TEST_CASE("power and product documents flatten") {
  const auto s = load_space(R"({"type":"product","components":[
      {"type":"power","base":{"type":"gaussian","mean":0,"stddev":1},"n":3},
      {"type":"finite","labels":[1,2],"metric":[[0,1],[1,0]],"prob":[0.25,0.75]}]})");
  const auto& p = std::get<ProductSpec>(s);
  CHECK(p.size() == 4);
  CHECK(p.value(3, 1.0) == 2.0);
  CHECK(p.value(0, -0.25) == -0.25);
  CHECK(!p.finite_point_count(100));
  const auto back = std::get<ProductSpec>(load_space(serialize_space(p)));
  CHECK(back == p);
}

TEST_CASE("markov marginals and trajectory space") {
  const std::string doc = R"({"type":"markov","states":)" + std::string(kTwoPoint) +
                          R"(,"initial":[1,0],"transition":[[0.5,0.5],[0,1]],"horizon":3})";
  std::vector<std::string> sink;
  auto previous = diag::set_sink([&](diag::Level, std::string_view m) { sink.emplace_back(m); });
  const auto chain = std::get<MarkovProcessSpec>(load_space(doc));
  diag::set_sink(previous);
  CHECK(chain.marginal(1) == std::vector<double>{1.0, 0.0});
  CHECK(chain.marginal(2) == std::vector<double>{0.5, 0.5});
  CHECK(chain.marginal(3) == std::vector<double>{0.25, 0.75});
  CHECK(chain.trajectory_space().size() == 3);
  CHECK_THROWS_AS(chain.marginal(4), DomainError);
}

TEST_CASE("line space labels") {
  const std::vector<double> x{0.0, 0.5, 2.0};
  const auto s = line_space(x, {0.25, 0.25, 0.5});
  CHECK(s.labels() == std::vector<std::string>{"0", "0.5", "2"});
  CHECK(s.distance(0, 2) == 2.0);
  CHECK(*s.numeric_value(1) == 0.5);
}
