#pragma once

// Closed-form tail bounds for Lipschitz functions of independent and weakly
// dependent coordinates, the stability bounds built on them, and an empirical
// check of the Lipschitz condition they assume.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concdiam/spaces.hpp"

namespace concdiam {

/// min(1, 2 exp(-2 t^2 / sum w_i^2)). Throws DomainError("metric diameter
/// unbounded; McDiarmid inapplicable") when a width is infinite or <= 0.
double mcdiarmid_bound(std::span<const double> widths, double t);

/// min(1, 2 exp(-t^2 / (2 sum Delta_i^2))). With every Delta_i = 0 the
/// statistic is constant: 1 at t = 0 and 0 beyond.
double subgaussian_bound(std::span<const double> deltas, double t);

/// 1 for t <= sum tau_bar_i, else min(1, 2 exp(-(t - sum tau_bar)^2 /
/// (2 sum Delta_bar_i^2))). The vectors must have equal length.
double mixing_bound(std::span<const double> deltas_bar, std::span<const double> tau_bar, double t);

/// min(1, 2 exp(-((p-1)/p) (t / ||Delta||_p)^{p/(p-1)})). Throws DomainError
/// for p <= 1. Infinite entries make the bound vacuous (1).
double orlicz_bound(std::span<const double> deltas, double p, double t);

/// 1/2 beta^2 Delta_SG^2: bound on the expected generalization gap of a
/// beta-totally-Lipschitz-stable algorithm.
double stability_bias_bound(double beta, double delta_sg);

/// min(1, exp(-epsilon^2 / (18 beta^2 Delta_SG^2 n))): probability that the
/// generalization gap exceeds stability_bias_bound + epsilon. One-sided.
/// Throws DomainError for beta <= 0, delta_sg <= 0 or n < 1.
double stability_excess_risk_bound(double beta, double delta_sg, std::size_t n, double epsilon);

enum class BoundKind { mcdiarmid, subgaussian, mixing, orlicz, stability };

std::string_view to_string(BoundKind kind);
/// Throws ValidationError for unknown names.
BoundKind bound_kind_from_string(std::string_view name);

struct BoundParams {
  /// Per-coordinate widths (mcdiarmid) or diameters (subgaussian, mixing, orlicz).
  std::vector<double> deltas{};
  std::vector<double> tau_bar{};
  double p = 2.0;
  double beta = 0.0;
  double delta_sg = 0.0;
  std::size_t n = 1;
};

/// A tail bound t -> Pr[|phi - E phi| > t] for an L-Lipschitz phi, evaluated
/// as the 1-Lipschitz bound at t / L. Values lie in [0, 1] and are
/// nonincreasing in t. For the stability kind t plays the role of epsilon.
class TailBound {
 public:
  /// Validates the parameters for `kind` (throws DomainError/ValidationError).
  TailBound(BoundKind kind, BoundParams params, double lipschitz = 1.0, std::string name = {});

  BoundKind kind() const noexcept { return kind_; }
  const BoundParams& params() const noexcept { return params_; }
  double lipschitz() const noexcept { return lipschitz_; }
  const std::string& name() const noexcept { return name_; }

  /// Throws DomainError for t < 0 or NaN.
  double evaluate(double t) const;
  double operator()(double t) const { return evaluate(t); }

  /// The same bound for a statistic with Lipschitz constant `factor` times the
  /// current one.
  TailBound scaled(double factor) const;

 private:
  BoundKind kind_;
  BoundParams params_;
  double lipschitz_;
  std::string name_;
};

/// A statistic on product points in coordinate form (see Coordinates).
using Statistic = std::function<double(Coordinates)>;

struct LipschitzReport {
  bool passed = true;
  /// true when every pair of points was examined.
  bool exhaustive = false;
  std::size_t pairs_checked = 0;
  /// max |phi(x) - phi(y)| / rho(x, y) over the pairs examined.
  double worst_ratio = 0.0;
  /// The violating pair with the largest ratio, if any.
  std::optional<std::pair<std::vector<double>, std::vector<double>>> violation;
};

/// Largest product size checked exhaustively.
inline constexpr std::size_t kExhaustivePointCap = 10000;

/// Checks |phi(x) - phi(y)| <= L rho(x, y) + 1e-12. All-finite products with at
/// most kExhaustivePointCap points are checked on every pair; otherwise
/// `trials` seeded random pairs are tested, half drawn independently and half
/// differing in a single coordinate. Violations are reported, not thrown.
LipschitzReport lipschitz_check(const ProductSpec& spec, const Statistic& phi, double lipschitz,
                                std::size_t trials, std::uint64_t seed, unsigned threads = 0);

}  // namespace concdiam
