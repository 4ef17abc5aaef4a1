#include "concdiam/diameter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "concdiam/diagnostics.hpp"
#include "concdiam/errors.hpp"
#include "format.hpp"
#include "search.hpp"

namespace concdiam {

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) {
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.value)) throw ValidationError("atom values must be finite");
    if (!std::isfinite(a.prob) || a.prob < 0.0) {
      throw ValidationError("atom probabilities must be nonnegative");
    }
    total += a.prob;
  }
  // Summing k masses can drift by about k ulps; a million pair masses from a
  // 1000-point space already exceed kLoadTolerance.
  const double tolerance =
      kLoadTolerance + 2.0 * static_cast<double>(atoms.size()) * std::numeric_limits<double>::epsilon();
  if (std::abs(total - 1.0) > tolerance) {
    throw ValidationError("probabilities sum to " + detail::format_g(total, 12));
  }
  if (total != 1.0) {
    for (auto& a : atoms) a.prob /= total;
  }
  // Stable so that mirrored atoms accumulate in the same order.
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const Atom& a, const Atom& b) { return a.value < b.value; });
  for (const auto& a : atoms) {
    if (a.prob == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().value == a.value) {
      atoms_.back().prob += a.prob;
    } else {
      atoms_.push_back(a);
    }
  }
}

DiscreteDistribution DiscreteDistribution::point_mass(double value) {
  return DiscreteDistribution({{value, 1.0}});
}

double DiscreteDistribution::mean() const {
  double m = 0.0;
  for (const auto& a : atoms_) m += a.prob * a.value;
  return m;
}

double DiscreteDistribution::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& a : atoms_) v += a.prob * (a.value - m) * (a.value - m);
  return v;
}

double DiscreteDistribution::max_abs() const {
  double m = 0.0;
  for (const auto& a : atoms_) m = std::max(m, std::abs(a.value));
  return m;
}

bool DiscreteDistribution::is_symmetric() const {
  const std::size_t n = atoms_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& lo = atoms_[i];
    const auto& hi = atoms_[n - 1 - i];
    if (lo.value != -hi.value || lo.prob != hi.prob) return false;
  }
  return true;
}

// Both maps preserve the sorted order, so the atoms are taken over as is
// rather than re-validated.
DiscreteDistribution DiscreteDistribution::reflected() const {
  DiscreteDistribution out;
  out.atoms_.assign(atoms_.rbegin(), atoms_.rend());
  for (auto& a : out.atoms_) a.value = -a.value;
  return out;
}

DiscreteDistribution DiscreteDistribution::scaled(double c) const {
  if (!(c > 0.0)) throw DomainError("scale factor must be positive");
  DiscreteDistribution out;
  out.atoms_ = atoms_;
  for (auto& a : out.atoms_) a.value *= c;
  return out;
}

DiscreteDistribution symmetrized_distance(const FiniteMetricSpace& space) {
  const auto& p = space.prob();
  const std::size_t n = space.size();
  std::vector<DiscreteDistribution::Atom> atoms;
  double on_diagonal = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == 0.0) continue;
    on_diagonal += p[i] * p[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (p[j] == 0.0) continue;
      // Ordered pairs (i,j) and (j,i) each carry p_i p_j; the fair sign splits
      // their total evenly between +d and -d.
      const double w = p[i] * p[j];
      const double d = space.distance(i, j);
      atoms.push_back({d, w});
      atoms.push_back({-d, w});
    }
  }
  atoms.push_back({0.0, on_diagonal});
  return DiscreteDistribution(std::move(atoms));
}

double mgf_log(const DiscreteDistribution& dist, double lambda) {
  if (lambda == 0.0) return 0.0;
  const auto atoms = dist.atoms();
  if (std::abs(lambda) * dist.max_abs() < 0.5) {
    double s = 0.0;
    for (const auto& a : atoms) s += a.prob * std::expm1(lambda * a.value);
    return std::log1p(s);
  }
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& a : atoms) m = std::max(m, lambda * a.value);
  double s = 0.0;
  for (const auto& a : atoms) s += a.prob * std::exp(lambda * a.value - m);
  return m + std::log(s);
}

namespace {

constexpr double kCenteringTolerance = 1e-10;
constexpr double kGridLow = 1e-4;
constexpr double kGridHigh = 1e3;
constexpr std::size_t kGridPoints = 2048;

}  // namespace

SubgaussianEstimate sigma_star(const DiscreteDistribution& dist, double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  if (std::abs(dist.mean()) > kCenteringTolerance) {
    throw DomainError("not centered: mean is " + detail::format_g(dist.mean(), 12));
  }
  SubgaussianEstimate est;
  est.tolerance = tol;
  const double scale = dist.max_abs();
  if (scale == 0.0) return est;

  // Work on X / max|X| so the grid is scale free.
  const DiscreteDistribution unit = dist.scaled(1.0 / scale);
  const double variance = unit.variance();
  est.variance_limit = variance * scale * scale;

  auto search = [&](const DiscreteDistribution& d) {
    return detail::maximize_log_grid(
        [&d](double lambda) { return 2.0 * mgf_log(d, lambda) / (lambda * lambda); }, kGridLow,
        kGridHigh, kGridPoints, tol);
  };
  auto best = search(unit);
  double sign = 1.0;
  if (!unit.is_symmetric()) {
    const auto neg = search(unit.reflected());
    if (neg.value > best.value) {
      best = neg;
      sign = -1.0;
    }
  }
  if (variance >= best.value) {
    est.sigma_star = std::sqrt(variance) * scale;
    est.argmax_lambda = 0.0;
  } else {
    est.sigma_star = std::sqrt(best.value) * scale;
    est.argmax_lambda = sign * best.argmax / scale;
  }
  return est;
}

SubgaussianEstimate subgaussian_diameter(const FiniteMetricSpace& space, double tol) {
  return sigma_star(symmetrized_distance(space), tol);
}

SubgaussianEstimate subgaussian_diameter(const GaussianLineSpace& space, double tol) {
  // Xi ~ N(0, 2 s^2): log E e^{lambda Xi} = s^2 lambda^2, so the objective is
  // constant at 2 s^2.
  SubgaussianEstimate est;
  est.tolerance = tol;
  est.sigma_star = space.stddev() * std::sqrt(2.0);
  est.variance_limit = 2.0 * space.stddev() * space.stddev();
  return est;
}

SubgaussianEstimate subgaussian_diameter(const Component& space, double tol) {
  return std::visit([tol](const auto& s) { return subgaussian_diameter(s, tol); }, space);
}

std::vector<double> conditional_subgaussian_diameters(const MarkovProcessSpec& chain, double tol) {
  const auto& states = chain.states();
  const std::size_t n = states.size();
  std::vector<double> out;
  out.reserve(chain.horizon());
  out.push_back(subgaussian_diameter(states.with_prob(chain.initial()), tol).sigma_star);

  std::vector<double> row_diameter(n, std::numeric_limits<double>::quiet_NaN());
  auto row_value = [&](std::size_t s) {
    if (std::isnan(row_diameter[s])) {
      const auto r = chain.row(s);
      row_diameter[s] =
          subgaussian_diameter(states.with_prob({r.begin(), r.end()}), tol).sigma_star;
    }
    return row_diameter[s];
  };

  std::vector<double> law = chain.initial();
  for (std::size_t step = 2; step <= chain.horizon(); ++step) {
    // law is the distribution of X_{step-1}.
    double best = 0.0;
    std::size_t skipped = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (law[s] > 0.0) {
        best = std::max(best, row_value(s));
      } else {
        ++skipped;
      }
    }
    if (skipped > 0) {
      diag::note("step " + std::to_string(step) + ": skipped " + std::to_string(skipped) +
                 " unreachable predecessor state(s)");
    }
    out.push_back(best);

    std::vector<double> next(n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      if (law[s] == 0.0) continue;
      for (std::size_t t = 0; t < n; ++t) next[t] += law[s] * chain.transition()(s, t);
    }
    law = std::move(next);
  }
  return out;
}

double orlicz_p_diameter(const FiniteMetricSpace& space, double p, double tol) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  if (p == 2.0) return subgaussian_diameter(space, tol).sigma_star;
  const auto xi = symmetrized_distance(space);
  const double scale = xi.max_abs();
  if (scale == 0.0) return 0.0;
  if (p > 2.0) return std::numeric_limits<double>::infinity();

  const DiscreteDistribution unit = xi.scaled(1.0 / scale);
  // Xi is symmetric, so lambda > 0 suffices. Both ends of the range tend to 0.
  const auto best = detail::maximize_log_grid(
      [&unit, p](double lambda) {
        return std::pow(p * std::max(0.0, mgf_log(unit, lambda)), 1.0 / p) / lambda;
      },
      kGridLow, kGridHigh, kGridPoints, tol);
  return best.value * scale;
}

double max_subgaussian_excess(const DiscreteDistribution& dist, double sigma,
                              std::size_t grid_points) {
  const double scale = dist.max_abs();
  if (scale == 0.0) return 0.0;
  const bool symmetric = dist.is_symmetric();
  double worst = -std::numeric_limits<double>::infinity();
  const double lo = std::log(kGridLow / scale);
  const double hi = std::log(kGridHigh / scale);
  for (std::size_t k = 0; k < grid_points; ++k) {
    const double t = grid_points == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(grid_points - 1);
    const double lambda = std::exp(lo + t * (hi - lo));
    const double bound = sigma * sigma * lambda * lambda / 2.0;
    worst = std::max(worst, mgf_log(dist, lambda) - bound);
    if (!symmetric) worst = std::max(worst, mgf_log(dist, -lambda) - bound);
  }
  return worst;
}

}  // namespace concdiam
