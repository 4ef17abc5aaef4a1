#pragma once

// Seeded sampling of product spaces and Markov chains, empirical tails, and
// Monte Carlo certification of tail bounds.
//
// Sample row r of any run is drawn from RandomStream(seed, r), so samples do
// not depend on thread count or chunking.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "concdiam/bounds.hpp"
#include "concdiam/matrix.hpp"
#include "concdiam/spaces.hpp"
#include "concdiam/transport.hpp"

namespace concdiam {

/// count x n matrix of product points in coordinate form.
Matrix sample_product(const ProductSpec& spec, std::size_t count, std::uint64_t seed,
                      unsigned threads = 0);

/// count x horizon matrix of trajectories (state indices).
Matrix sample_markov(const MarkovProcessSpec& chain, std::size_t count, std::uint64_t seed,
                     unsigned threads = 0);

/// Fraction of values with |v - center| > t, per t.
std::vector<double> empirical_tail(std::span<const double> values, double center,
                                   std::span<const double> t_grid);

/// One-sided Clopper-Pearson limits for `successes` out of `trials` at
/// confidence 1 - alpha: {lower, upper}.
std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials, double alpha);

/// A statistic together with the Lipschitz constant claimed for it.
struct NamedStatistic {
  std::string name{};
  Statistic fn{};
  double lipschitz = 1.0;
};

/// Built-in statistics on a product of components.
///   mean, sum, max: of the coordinate values (numeric labels for finite
///     components); Lipschitz 1/n, 1, 1.
///   dist_sum: sum_i rho_i(x_i, reference) with `reference` a label present
///     in every (finite) component; Lipschitz 1.
///   linear: sum_i w_i value(x_i); Lipschitz max |w_i|.
/// `lipschitz` overrides the default constant.
struct StatisticSpec {
  std::string name = "mean";
  std::string reference{};
  std::vector<double> weights{};
  std::optional<double> lipschitz{};
};

NamedStatistic make_statistic(const ProductSpec& points, const StatisticSpec& spec);

using Model = std::variant<ProductSpec, MarkovProcessSpec>;

/// The product whose points the model's samples are.
ProductSpec point_space(const Model& model);

/// A bound to certify. Parameters left empty are derived from the model:
///   product model: mcdiarmid widths = metric diameters, subgaussian deltas =
///     Delta_SG, orlicz deltas = Delta_OR(p), mixing = subgaussian with
///     tau_bar = 0;
///   chain model: mixing uses the conditional diameters and exact tau_bar
///     (upper_bound mode when the tails exceed kTailAtomCap).
/// Stability bounds need explicit beta, delta_sg and n.
struct BoundRequest {
  BoundKind kind = BoundKind::subgaussian;
  std::string name{};
  std::optional<std::vector<double>> deltas{};
  std::optional<std::vector<double>> tau_bar{};
  std::optional<double> p{};
  std::optional<double> beta{};
  std::optional<double> delta_sg{};
  std::optional<std::size_t> n{};
};

struct ExperimentConfig {
  Model model;
  NamedStatistic statistic{};
  std::size_t samples = 1;
  std::vector<double> t_grid{};
  std::uint64_t seed = 0;
  double confidence_slack = 1e-3;
  std::size_t lipschitz_trials = 10000;
  unsigned threads = 0;
  std::vector<BoundRequest> bounds{};

  /// samples >= 1, t_grid strictly increasing and nonnegative, slack in (0, 1).
  void validate() const;
};

/// Parses an experiment document (JSON):
///   {"space": <space document or path>, "statistic": {"name": ..., ...},
///    "samples": N, "t_grid": [...], "seed": S, "confidence_slack": a,
///    "lipschitz_trials": K, "bounds": [{"kind": ..., ...}]}
/// "chain" is accepted in place of "space". Relative paths resolve against
/// `base_dir`.
ExperimentConfig load_experiment(std::string_view document,
                                 const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_file(const std::filesystem::path& path);

/// TailBounds for the config's requests, scaled by the statistic's Lipschitz
/// constant.
std::vector<TailBound> derive_bounds(const ExperimentConfig& config);

/// E phi by enumeration when the model has at most kExhaustivePointCap
/// positive-probability points; nullopt otherwise.
std::optional<double> exact_expectation(const Model& model, const Statistic& phi);

enum class Centering { exact, empirical };

struct TailReport {
  std::vector<double> t;
  std::vector<double> empirical;
  std::vector<double> ci_lower;
  std::vector<double> ci_upper;
  std::vector<std::string> bound_names;
  /// bound_values[b][k] = bound b at t[k].
  std::vector<std::vector<double>> bound_values;
  /// Per bound: never below the lower confidence limit.
  std::vector<bool> bound_pass;
  /// Per t: every bound passes.
  std::vector<bool> row_pass;
  bool passed = true;

  Centering centering = Centering::empirical;
  double center = 0.0;
  std::size_t samples = 0;
  double confidence_slack = 0.0;
  LipschitzReport lipschitz;

  /// Header t,empirical,ci_upper,<bound names>,verdict; one row per t.
  std::string to_csv(int digits = 12) const;
};

/// Samples the model, evaluates the statistic, and compares its empirical
/// tail with each bound. A bound fails at t only when the one-sided
/// Clopper-Pearson lower limit (confidence 1 - confidence_slack) of the tail
/// exceeds it. Centering is exact E phi when exact_expectation applies, the
/// sample mean otherwise.
///
/// Throws CertificationRefused if the statistic fails lipschitz_check at its
/// claimed constant.
TailReport certify_bounds(const ExperimentConfig& config, const std::vector<TailBound>& bounds);

struct BetaEstimate {
  /// max over coordinates; a lower estimate of the stability constant.
  double beta = 0.0;
  /// max observed |loss(z) - loss(z')| / rho_i(z_i, z'_i) per coordinate i.
  std::vector<double> per_coordinate;
};

/// Empirical total-Lipschitz constant of `loss` on a product of n + 1
/// coordinates (training points then the test point): for each trial a point
/// z is drawn and every coordinate in turn is redrawn. Sampling can only
/// under-estimate the true constant.
BetaEstimate estimate_beta(const Statistic& loss, const ProductSpec& spec, std::size_t trials,
                           std::uint64_t seed, unsigned threads = 0);

}  // namespace concdiam
