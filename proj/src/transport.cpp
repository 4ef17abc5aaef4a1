#include "concdiam/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "concdiam/errors.hpp"
#include "network_simplex.hpp"
#include "parallel.hpp"

namespace concdiam {

double tv_distance(std::span<const double> mu, std::span<const double> nu) {
  if (mu.size() != nu.size()) throw ValidationError("distributions have different lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) s += std::abs(mu[i] - nu[i]);
  return 0.5 * s;
}

TransportResult optimal_transport(const Matrix& cost, std::span<const double> mu,
                                  std::span<const double> nu) {
  if (cost.rows() != mu.size() || cost.cols() != nu.size()) {
    throw ValidationError("cost matrix is " + std::to_string(cost.rows()) + "x" +
                          std::to_string(cost.cols()) + " but the marginals have lengths " +
                          std::to_string(mu.size()) + " and " + std::to_string(nu.size()));
  }
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] < 0.0) throw ValidationError("marginal masses must be nonnegative");
    if (mu[i] > 0.0) rows.push_back(i);
  }
  for (std::size_t j = 0; j < nu.size(); ++j) {
    if (nu[j] < 0.0) throw ValidationError("marginal masses must be nonnegative");
    if (nu[j] > 0.0) cols.push_back(j);
  }

  std::vector<double> sub_cost(rows.size() * cols.size());
  std::vector<double> supply(rows.size());
  std::vector<double> demand(cols.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    supply[a] = mu[rows[a]];
    for (std::size_t b = 0; b < cols.size(); ++b) {
      sub_cost[a * cols.size() + b] = cost(rows[a], cols[b]);
    }
  }
  for (std::size_t b = 0; b < cols.size(); ++b) demand[b] = nu[cols[b]];

  const auto flow = detail::solve_transportation(sub_cost, rows.size(), cols.size(), supply, demand);

  TransportResult result;
  result.coupling.joint = Matrix(mu.size(), nu.size());
  result.coupling.row_marginal.assign(mu.begin(), mu.end());
  result.coupling.col_marginal.assign(nu.begin(), nu.end());
  double total = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double x = flow[a * cols.size() + b];
      if (x == 0.0) continue;
      result.coupling.joint(rows[a], cols[b]) = x;
      total += x * sub_cost[a * cols.size() + b];
    }
  }
  result.coupling.cost = total;
  result.distance = total;
  return result;
}

TransportResult wasserstein1(const Matrix& metric, std::span<const double> mu,
                             std::span<const double> nu) {
  if (metric.rows() != metric.cols()) throw ValidationError("metric must be square");
  return optimal_transport(metric, mu, nu);
}

TransportResult wasserstein1(const FiniteMetricSpace& space, std::span<const double> mu,
                             std::span<const double> nu) {
  return wasserstein1(space.metric(), mu, nu);
}

std::pair<double, double> coupling_expectation_check(const Coupling& coupling,
                                                     std::span<const double> f,
                                                     std::span<const double> g) {
  const Matrix& pi = coupling.joint;
  if (f.size() != pi.rows() || g.size() != pi.cols()) {
    throw ValidationError("function tables do not match the coupling dimensions");
  }
  double joint = 0.0;
  for (std::size_t i = 0; i < pi.rows(); ++i) {
    for (std::size_t j = 0; j < pi.cols(); ++j) joint += pi(i, j) * (f[i] - g[j]);
  }
  double marginal = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) marginal += coupling.row_marginal[i] * f[i];
  for (std::size_t j = 0; j < g.size(); ++j) marginal -= coupling.col_marginal[j] * g[j];
  return {joint, marginal};
}

namespace {

/// Every trajectory of `length` steps started after state `start`, with its
/// probability. Trajectories are stored back to back.
struct TailLaw {
  std::size_t length = 0;
  std::vector<std::size_t> states;
  std::vector<double> prob;

  std::size_t size() const { return prob.size(); }
  const std::size_t* path(std::size_t k) const { return states.data() + k * length; }
};

TailLaw enumerate_tails(const MarkovProcessSpec& chain, std::size_t start, std::size_t length) {
  TailLaw law;
  law.length = length;
  const std::size_t n = chain.states().size();
  std::vector<std::size_t> path(length);
  // Iterative DFS over positive-probability transitions.
  auto recurse = [&](auto&& self, std::size_t depth, std::size_t from, double p) -> void {
    if (depth == length) {
      law.states.insert(law.states.end(), path.begin(), path.end());
      law.prob.push_back(p);
      return;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const double q = chain.transition()(from, t);
      if (q == 0.0) continue;
      path[depth] = t;
      self(self, depth + 1, t, p * q);
    }
  };
  recurse(recurse, 0, start, 1.0);
  return law;
}

double tail_distance(const MarkovProcessSpec& chain, const TailLaw& a, const TailLaw& b) {
  const FiniteMetricSpace& space = chain.states();
  Matrix cost(a.size(), b.size());
  for (std::size_t x = 0; x < a.size(); ++x) {
    const std::size_t* pa = a.path(x);
    for (std::size_t y = 0; y < b.size(); ++y) {
      const std::size_t* pb = b.path(y);
      double d = 0.0;
      for (std::size_t k = 0; k < a.length; ++k) d += space.distance(pa[k], pb[k]);
      cost(x, y) = d;
    }
  }
  return optimal_transport(cost, a.prob, b.prob).distance;
}

MixingProfile exact_profile(const MarkovProcessSpec& chain, unsigned threads) {
  const std::size_t n = chain.states().size();
  const std::size_t horizon = chain.horizon();
  std::size_t atoms = 1;
  for (std::size_t k = 1; k < horizon; ++k) {
    if (atoms > kTailAtomCap / n) {
      throw CapacityError("exact mixing coefficients need |states|^(horizon-1) <= " +
                          std::to_string(kTailAtomCap) + " tail atoms; use upper_bound mode");
    }
    atoms *= n;
  }

  MixingProfile profile;
  profile.method = MixingMode::exact;
  profile.tau_bar.assign(horizon, 0.0);
  profile.tau_bar_reachable.assign(horizon, 0.0);

  // jobs: (step i in 1..horizon-1, pair s < s')
  struct Job {
    std::size_t step;
    std::size_t s;
    std::size_t t;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 1; i < horizon; ++i) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t t = s + 1; t < n; ++t) jobs.push_back({i, s, t});
    }
  }
  // Tail laws per (step, state), built lazily by whichever job needs them first
  // would need locking; they are cheap next to the transport solves, so build
  // them up front.
  std::vector<std::vector<TailLaw>> tails(horizon);
  for (std::size_t i = 1; i < horizon; ++i) {
    tails[i].reserve(n);
    for (std::size_t s = 0; s < n; ++s) tails[i].push_back(enumerate_tails(chain, s, horizon - i));
  }

  std::vector<double> distance(jobs.size(), 0.0);
  detail::parallel_for_each(jobs.size(), threads, [&](std::size_t k) {
    const Job& job = jobs[k];
    distance[k] = tail_distance(chain, tails[job.step][job.s], tails[job.step][job.t]);
  });

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    const Job& job = jobs[k];
    double& all = profile.tau_bar[job.step - 1];
    all = std::max(all, distance[k]);
  }
  for (std::size_t i = 1; i < horizon; ++i) {
    const auto law = chain.marginal(i);
    for (std::size_t k = 0; k < jobs.size(); ++k) {
      const Job& job = jobs[k];
      if (job.step != i || law[job.s] == 0.0 || law[job.t] == 0.0) continue;
      double& reach = profile.tau_bar_reachable[i - 1];
      reach = std::max(reach, distance[k]);
    }
  }
  return profile;
}

MixingProfile upper_bound_profile(const MarkovProcessSpec& chain) {
  const FiniteMetricSpace& space = chain.states();
  const std::size_t n = space.size();
  double spread = 0.0;
  double contraction = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      const double w = wasserstein1(space, chain.row(s), chain.row(t)).distance;
      spread = std::max(spread, w);
      contraction = std::max(contraction, w / space.distance(s, t));
    }
  }
  MixingProfile profile;
  profile.method = MixingMode::upper_bound;
  const std::size_t horizon = chain.horizon();
  profile.tau_bar.assign(horizon, 0.0);
  for (std::size_t i = 1; i < horizon; ++i) {
    double sum = 0.0;
    double power = 1.0;
    for (std::size_t k = 0; k + i < horizon; ++k) {
      sum += power;
      power *= contraction;
    }
    profile.tau_bar[i - 1] = spread * sum;
  }
  return profile;
}

}  // namespace

MixingProfile tau_coefficients(const MarkovProcessSpec& chain, MixingMode mode, unsigned threads) {
  return mode == MixingMode::exact ? exact_profile(chain, threads) : upper_bound_profile(chain);
}

}  // namespace concdiam
