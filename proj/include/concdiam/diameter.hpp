#pragma once

// Symmetrized distances and the subgaussian / Orlicz diameters built on them.

#include <span>
#include <vector>

#include "concdiam/spaces.hpp"

namespace concdiam {

/// Default relative tolerance of the sigma* search.
inline constexpr double kDefaultTolerance = 1e-9;

/// A finite real-valued distribution, renormalized to total mass one. Equal
/// values are merged and
/// zero-probability atoms dropped at construction; atoms are kept sorted by
/// value.
class DiscreteDistribution {
 public:
  struct Atom {
    double value;
    double prob;
    bool operator==(const Atom&) const = default;
  };

  /// Throws ValidationError when probabilities are negative or do not sum to
  /// one within kLoadTolerance plus 2 ulps per atom.
  explicit DiscreteDistribution(std::vector<Atom> atoms);

  static DiscreteDistribution point_mass(double value);

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  double mean() const;
  double variance() const;
  double max_abs() const;

  /// True when P(v) == P(-v) for every atom (exact comparison).
  bool is_symmetric() const;

  /// The law of -X.
  DiscreteDistribution reflected() const;

  /// The law of c X for c > 0.
  DiscreteDistribution scaled(double c) const;

 private:
  DiscreteDistribution() = default;

  std::vector<Atom> atoms_;
};

/// Law of eps * rho(X, X') with X, X' ~ mu independent and eps a fair sign.
DiscreteDistribution symmetrized_distance(const FiniteMetricSpace& space);

/// log E exp(lambda X), evaluated with max-subtraction (and log1p/expm1 near
/// zero) so no intermediate overflows.
double mgf_log(const DiscreteDistribution& dist, double lambda);

struct SubgaussianEstimate {
  double sigma_star = 0.0;
  /// lambda attaining the sup; 0 when the sup is the lambda -> 0 limit.
  double argmax_lambda = 0.0;
  double tolerance = kDefaultTolerance;
  /// lim_{lambda -> 0} 2 log MGF(lambda) / lambda^2, i.e. the variance.
  double variance_limit = 0.0;
};

/// sigma*(X) = sqrt(sup_{lambda != 0} 2 log E e^{lambda X} / lambda^2) for a
/// centered distribution.
///
/// The objective is scanned on 2048 log-spaced points lambda in [1e-4, 1e3]
/// (in units of 1 / max|X|, so the result is scale covariant), the best
/// bracket is refined by golden-section search to relative width `tol`, and
/// the variance is included as the lambda -> 0 candidate. Only lambda > 0 is
/// searched for symmetric laws; otherwise both signs are.
///
/// Throws DomainError("not centered") if |E X| > 1e-10.
SubgaussianEstimate sigma_star(const DiscreteDistribution& dist, double tol = kDefaultTolerance);

/// Delta_SG = sigma*(Xi). Finite spaces go through sigma_star; the Gaussian
/// line uses the closed form stddev * sqrt(2) (Xi ~ N(0, 2 stddev^2)).
SubgaussianEstimate subgaussian_diameter(const FiniteMetricSpace& space, double tol = kDefaultTolerance);
SubgaussianEstimate subgaussian_diameter(const GaussianLineSpace& space, double tol = kDefaultTolerance);
SubgaussianEstimate subgaussian_diameter(const Component& space, double tol = kDefaultTolerance);

/// Maximal conditional subgaussian diameters of a Markov chain, one per step.
/// Step 1 uses the initial law; step i > 1 takes the max over states reachable
/// at step i - 1 of the diameter under that state's transition row.
std::vector<double> conditional_subgaussian_diameters(const MarkovProcessSpec& chain,
                                                      double tol = kDefaultTolerance);

/// Smallest a with log E e^{lambda Xi} <= (a |lambda|)^p / p for all lambda.
///
/// For p = 2 this is Delta_SG. For 1 < p < 2 the sup of
/// (p log MGF(lambda))^{1/p} / lambda is found as in sigma_star. For p > 2 the
/// left side behaves like Var(Xi) lambda^2 / 2 near zero and dominates
/// |lambda|^p, so the diameter is +infinity unless Xi == 0.
///
/// Throws DomainError("p must exceed 1") for p <= 1.
double orlicz_p_diameter(const FiniteMetricSpace& space, double p, double tol = kDefaultTolerance);

/// max over a log-spaced lambda grid of log MGF(lambda) - sigma^2 lambda^2 / 2
/// (both signs of lambda). Nonpositive, up to rounding, iff sigma certifies
/// the subgaussian inequality on the grid. The grid spans [1e-4, 1e3] / max|X|.
double max_subgaussian_excess(const DiscreteDistribution& dist, double sigma,
                              std::size_t grid_points = 10000);

}  // namespace concdiam
