#pragma once

// Metric probability spaces: finite spaces, the Gaussian line, their l1
// products, and finite-state Markov processes over a single state space.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "concdiam/matrix.hpp"

namespace concdiam {

/// Load-time tolerance for probability sums, metric symmetry and the triangle
/// inequality.
inline constexpr double kLoadTolerance = 1e-12;

/// A finite metric probability space (X, rho, mu).
///
/// Invariants, enforced by the constructor:
///   - labels are unique and match the metric and probability dimensions;
///   - the metric is finite, symmetric, zero exactly on the diagonal, positive
///     off it, and satisfies the triangle inequality within kLoadTolerance;
///   - probabilities are nonnegative and sum to one within kLoadTolerance.
/// Sums within tolerance are renormalized; anything else is rejected with a
/// ValidationError. Zero-probability points are kept (with a warning): they
/// take part in the metric but not in any distribution.
class FiniteMetricSpace {
 public:
  FiniteMetricSpace(std::vector<std::string> labels, Matrix metric, std::vector<double> prob);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const Matrix& metric() const noexcept { return metric_; }
  const std::vector<double>& prob() const noexcept { return prob_; }

  double distance(std::size_t i, std::size_t j) const { return metric_(i, j); }

  /// Index of `label`; throws ValidationError for unknown labels.
  std::size_t index_of(std::string_view label) const;

  /// The label read as a decimal number, when it is one.
  std::optional<double> numeric_value(std::size_t i) const;

  /// Same points and metric under a different probability vector. The metric
  /// is not re-validated.
  FiniteMetricSpace with_prob(std::vector<double> prob) const;

  bool operator==(const FiniteMetricSpace&) const = default;

 private:
  struct Trusted {};
  FiniteMetricSpace(Trusted, std::vector<std::string> labels, Matrix metric, std::vector<double> prob);

  std::vector<std::string> labels_;
  Matrix metric_;
  std::vector<double> prob_;
};

/// (R, |x - x'|, N(mean, stddev^2)). The metric diameter is infinite.
class GaussianLineSpace {
 public:
  GaussianLineSpace(double mean, double stddev);

  double mean() const noexcept { return mean_; }
  double stddev() const noexcept { return stddev_; }

  bool operator==(const GaussianLineSpace&) const = default;

 private:
  double mean_;
  double stddev_;
};

using Component = std::variant<FiniteMetricSpace, GaussianLineSpace>;

/// Coordinates of a product point. A finite component stores the atom index
/// (an exact small integer); a Gaussian component stores the real coordinate.
using Coordinates = std::span<const double>;

/// The product space X_1 x ... x X_n with the independent product measure and
/// the l1 product metric rho^n(x, y) = sum_i rho_i(x_i, y_i).
class ProductSpec {
 public:
  explicit ProductSpec(std::vector<Component> components);

  /// n copies of `base`.
  static ProductSpec power(const Component& base, std::size_t n);

  std::size_t size() const noexcept { return components_.size(); }
  const std::vector<Component>& components() const noexcept { return components_; }
  const Component& component(std::size_t i) const { return components_[i]; }

  /// l1 product distance between two points in coordinate form.
  double distance(Coordinates x, Coordinates y) const;

  /// Real value of coordinate `i` of a point: the numeric label for finite
  /// components (ValidationError when the label is not a number), the
  /// coordinate itself for the Gaussian line.
  double value(std::size_t i, double coordinate) const;

  /// Converts a tuple of labels (decimal strings for Gaussian coordinates) to
  /// coordinate form. Throws ValidationError on dimension mismatch or unknown
  /// label.
  std::vector<double> encode(std::span<const std::string> labels) const;

  /// Number of points when every component is finite and the count fits in
  /// `cap`; nullopt otherwise.
  std::optional<std::size_t> finite_point_count(std::size_t cap) const;

  bool operator==(const ProductSpec&) const = default;

 private:
  std::vector<Component> components_;
};

/// A time-homogeneous Markov chain X_1, ..., X_horizon on a finite metric
/// space: X_1 ~ initial, X_{k+1} | X_k = s ~ transition row s.
class MarkovProcessSpec {
 public:
  MarkovProcessSpec(FiniteMetricSpace states, std::vector<double> initial, Matrix transition,
                    std::size_t horizon);

  const FiniteMetricSpace& states() const noexcept { return states_; }
  const std::vector<double>& initial() const noexcept { return initial_; }
  const Matrix& transition() const noexcept { return transition_; }
  std::size_t horizon() const noexcept { return horizon_; }

  std::span<const double> row(std::size_t s) const { return transition_.row(s); }

  /// Law of X_step (1-based).
  std::vector<double> marginal(std::size_t step) const;

  /// horizon copies of the state space; the metric structure the chain's
  /// trajectories live in.
  ProductSpec trajectory_space() const;

  bool operator==(const MarkovProcessSpec&) const = default;

 private:
  FiniteMetricSpace states_;
  std::vector<double> initial_;
  Matrix transition_;
  std::size_t horizon_;
};

using Space = std::variant<FiniteMetricSpace, GaussianLineSpace, ProductSpec, MarkovProcessSpec>;

/// Parses a space-definition document (JSON). Throws ParseError for malformed
/// documents and ValidationError for invariant violations.
Space load_space(std::string_view document);
Space load_space_file(const std::filesystem::path& path);

/// Serializes a space back to its definition document. Numbers are written
/// with round-trip precision, so finite spaces reload bit-identically.
std::string serialize_space(const Space& space);

/// l1 product distance between label tuples.
double product_distance(const ProductSpec& spec, std::span<const std::string> x,
                        std::span<const std::string> y);

/// sup of rho(x, x') over all pairs.
double metric_diameter(const FiniteMetricSpace& space);
/// As above; +infinity for the Gaussian line.
double metric_diameter(const Component& component);

/// Validates a probability vector against kLoadTolerance, renormalizing when
/// within tolerance. `what` prefixes the error message.
std::vector<double> checked_probabilities(std::vector<double> prob, std::string_view what);

// Constructors for spaces used throughout tests and examples.

/// N points at mutual distance 1 under the uniform law.
FiniteMetricSpace equilateral_space(std::size_t n);

/// Points on the real line at `positions` with |x - x'| and the given law.
/// Labels are the positions printed as decimals.
FiniteMetricSpace line_space(std::span<const double> positions, std::vector<double> prob);

}  // namespace concdiam
