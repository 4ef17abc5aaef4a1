#pragma once

// Total variation, exact Wasserstein-1 by optimal coupling, and the
// transportation-cost mixing coefficients of a Markov chain.

#include <span>
#include <utility>
#include <vector>

#include "concdiam/matrix.hpp"
#include "concdiam/spaces.hpp"

namespace concdiam {

/// A joint law on point pairs with prescribed marginals.
struct Coupling {
  Matrix joint;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
  /// sum_ij joint(i,j) * cost(i,j)
  double cost = 0.0;
};

struct TransportResult {
  double distance = 0.0;
  Coupling coupling;
};

/// 1/2 sum |mu(x) - nu(x)|. Throws ValidationError on length mismatch.
double tv_distance(std::span<const double> mu, std::span<const double> nu);

/// Minimum-cost coupling of mu (rows) and nu (columns) under an arbitrary
/// nonnegative cost matrix, solved exactly as a transportation linear program
/// by the network simplex method. Zero-mass rows and columns are left out of
/// the program. Pivoting is deterministic (block search over arcs in index
/// order, strongly feasible leaving-arc rule), so equal inputs give equal
/// couplings.
TransportResult optimal_transport(const Matrix& cost, std::span<const double> mu,
                                  std::span<const double> nu);

/// W1(mu, nu) = min over couplings pi of E_pi rho(X, X').
TransportResult wasserstein1(const Matrix& metric, std::span<const double> mu,
                             std::span<const double> nu);
TransportResult wasserstein1(const FiniteMetricSpace& space, std::span<const double> mu,
                             std::span<const double> nu);

/// (E_pi[f(X) - g(X')], E_mu f - E_nu g). The two agree for every coupling.
std::pair<double, double> coupling_expectation_check(const Coupling& coupling,
                                                     std::span<const double> f,
                                                     std::span<const double> g);

enum class MixingMode { exact, upper_bound };

struct MixingProfile {
  /// tau_bar[i-1] for steps i = 1..horizon; the last entry is 0.
  std::vector<double> tau_bar;
  MixingMode method = MixingMode::exact;
  /// Exact mode only: the same sup restricted to state pairs that are both
  /// reachable at step i. tau_bar (all pairs) is never smaller.
  std::vector<double> tau_bar_reachable;
};

/// Largest number of tail trajectories exact mode will enumerate per state.
inline constexpr std::size_t kTailAtomCap = 10000;

/// Mixing coefficients tau_bar_i: the largest W1 distance, under the l1 metric
/// on the tail X_{i+1}..X_n, between the tail laws given two prefixes that
/// differ at step i. For a Markov chain the tail law depends on the prefix
/// only through X_i, so the sup runs over pairs of states.
///
/// exact: enumerates every tail trajectory and solves the transport problem
/// for each state pair. Throws CapacityError when
/// |states|^(horizon - 1) > kTailAtomCap.
///
/// upper_bound: w * sum_{k=0}^{n-i-1} kappa^k with w the largest one-step
/// W1(row_s, row_s') and kappa = max_{s != s'} W1(row_s, row_s') / rho(s, s'),
/// from coupling the two tails step by step. Never below the exact value.
///
/// `threads` caps the worker count (0 = hardware concurrency).
MixingProfile tau_coefficients(const MarkovProcessSpec& chain, MixingMode mode,
                               unsigned threads = 0);

}  // namespace concdiam
