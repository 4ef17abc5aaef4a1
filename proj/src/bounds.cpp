#include "concdiam/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "concdiam/errors.hpp"
#include "parallel.hpp"
#include "sampling.hpp"

namespace concdiam {
namespace {

constexpr double kLipschitzSlack = 1e-12;

void check_t(double t) {
  if (!(t >= 0.0)) throw DomainError("t must be a nonnegative number");
}

double sum_squares(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

double two_exp(double exponent) { return std::min(1.0, 2.0 * std::exp(-exponent)); }

void check_nonnegative(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!(x >= 0.0)) throw DomainError(std::string(what) + " must be nonnegative");
  }
}

void check_mcdiarmid(std::span<const double> widths) {
  if (widths.empty()) throw DomainError("widths must not be empty");
  for (double w : widths) {
    if (!std::isfinite(w) || !(w > 0.0)) {
      throw DomainError("metric diameter unbounded; McDiarmid inapplicable");
    }
  }
}

void check_mixing(std::span<const double> deltas_bar, std::span<const double> tau_bar) {
  if (deltas_bar.size() != tau_bar.size()) {
    throw DomainError("deltas_bar and tau_bar must have equal length");
  }
  check_nonnegative(deltas_bar, "deltas_bar");
  check_nonnegative(tau_bar, "tau_bar");
}

void check_stability(double beta, double delta_sg, std::size_t n) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("beta must be positive");
  if (!(delta_sg > 0.0) || !std::isfinite(delta_sg)) {
    throw DomainError("delta_sg must be positive");
  }
  if (n < 1) throw DomainError("n must be at least 1");
}

}  // namespace

double mcdiarmid_bound(std::span<const double> widths, double t) {
  check_mcdiarmid(widths);
  check_t(t);
  return two_exp(2.0 * t * t / sum_squares(widths));
}

double subgaussian_bound(std::span<const double> deltas, double t) {
  check_nonnegative(deltas, "deltas");
  check_t(t);
  const double s = sum_squares(deltas);
  if (s == 0.0) return t > 0.0 ? 0.0 : 1.0;
  return two_exp(t * t / (2.0 * s));
}

double mixing_bound(std::span<const double> deltas_bar, std::span<const double> tau_bar, double t) {
  check_mixing(deltas_bar, tau_bar);
  check_t(t);
  const double shift = std::accumulate(tau_bar.begin(), tau_bar.end(), 0.0);
  if (t <= shift) return 1.0;
  const double s = sum_squares(deltas_bar);
  if (s == 0.0) return 0.0;
  const double excess = t - shift;
  return two_exp(excess * excess / (2.0 * s));
}

double orlicz_bound(std::span<const double> deltas, double p, double t) {
  if (!(p > 1.0)) throw DomainError("p must exceed 1");
  check_nonnegative(deltas, "deltas");
  check_t(t);
  double s = 0.0;
  for (double d : deltas) s += std::pow(d, p);
  const double norm = std::pow(s, 1.0 / p);
  if (norm == 0.0) return t > 0.0 ? 0.0 : 1.0;
  const double q = p / (p - 1.0);
  return two_exp((p - 1.0) / p * std::pow(t / norm, q));
}

double stability_bias_bound(double beta, double delta_sg) {
  if (!(beta >= 0.0) || !(delta_sg >= 0.0)) {
    throw DomainError("beta and delta_sg must be nonnegative");
  }
  return 0.5 * beta * beta * delta_sg * delta_sg;
}

double stability_excess_risk_bound(double beta, double delta_sg, std::size_t n, double epsilon) {
  check_stability(beta, delta_sg, n);
  check_t(epsilon);
  const double scale = 18.0 * beta * beta * delta_sg * delta_sg * static_cast<double>(n);
  return std::min(1.0, std::exp(-epsilon * epsilon / scale));
}

std::string_view to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::mcdiarmid: return "mcdiarmid";
    case BoundKind::subgaussian: return "subgaussian";
    case BoundKind::mixing: return "mixing";
    case BoundKind::orlicz: return "orlicz";
    case BoundKind::stability: return "stability";
  }
  return "unknown";
}

BoundKind bound_kind_from_string(std::string_view name) {
  for (auto k : {BoundKind::mcdiarmid, BoundKind::subgaussian, BoundKind::mixing,
                 BoundKind::orlicz, BoundKind::stability}) {
    if (to_string(k) == name) return k;
  }
  throw ValidationError("unknown bound kind '" + std::string(name) +
                        "' (expected mcdiarmid, subgaussian, mixing, orlicz or stability)");
}

TailBound::TailBound(BoundKind kind, BoundParams params, double lipschitz, std::string name)
    : kind_(kind), params_(std::move(params)), lipschitz_(lipschitz), name_(std::move(name)) {
  if (!(lipschitz_ > 0.0) || !std::isfinite(lipschitz_)) {
    throw DomainError("Lipschitz constant must be positive and finite");
  }
  if (name_.empty()) name_ = std::string(to_string(kind_));
  switch (kind_) {
    case BoundKind::mcdiarmid:
      check_mcdiarmid(params_.deltas);
      break;
    case BoundKind::subgaussian:
      check_nonnegative(params_.deltas, "deltas");
      break;
    case BoundKind::mixing:
      check_mixing(params_.deltas, params_.tau_bar);
      break;
    case BoundKind::orlicz:
      if (!(params_.p > 1.0)) throw DomainError("p must exceed 1");
      check_nonnegative(params_.deltas, "deltas");
      break;
    case BoundKind::stability:
      check_stability(params_.beta, params_.delta_sg, params_.n);
      break;
  }
}

double TailBound::evaluate(double t) const {
  check_t(t);
  const double s = t / lipschitz_;
  switch (kind_) {
    case BoundKind::mcdiarmid: return mcdiarmid_bound(params_.deltas, s);
    case BoundKind::subgaussian: return subgaussian_bound(params_.deltas, s);
    case BoundKind::mixing: return mixing_bound(params_.deltas, params_.tau_bar, s);
    case BoundKind::orlicz: return orlicz_bound(params_.deltas, params_.p, s);
    case BoundKind::stability:
      return stability_excess_risk_bound(params_.beta, params_.delta_sg, params_.n, s);
  }
  throw InternalError("unhandled bound kind");
}

TailBound TailBound::scaled(double factor) const {
  return TailBound(kind_, params_, lipschitz_ * factor, name_);
}

namespace {

struct PairScan {
  std::size_t pairs = 0;
  double worst = 0.0;
  double worst_violation = -1.0;
  std::vector<double> x;
  std::vector<double> y;

  void record(Coordinates a, Coordinates b, double dphi, double rho, double lipschitz) {
    if (rho == 0.0) return;
    ++pairs;
    const double ratio = dphi / rho;
    worst = std::max(worst, ratio);
    if (dphi > lipschitz * rho + kLipschitzSlack && ratio > worst_violation) {
      worst_violation = ratio;
      x.assign(a.begin(), a.end());
      y.assign(b.begin(), b.end());
    }
  }

  void merge(const PairScan& other) {
    pairs += other.pairs;
    worst = std::max(worst, other.worst);
    if (other.worst_violation > worst_violation) {
      worst_violation = other.worst_violation;
      x = other.x;
      y = other.y;
    }
  }
};

LipschitzReport finish(std::vector<PairScan>& scans, bool exhaustive) {
  PairScan total;
  for (const auto& s : scans) total.merge(s);
  LipschitzReport report;
  report.exhaustive = exhaustive;
  report.pairs_checked = total.pairs;
  report.worst_ratio = total.worst;
  if (total.worst_violation >= 0.0) {
    report.passed = false;
    report.violation.emplace(std::move(total.x), std::move(total.y));
  }
  return report;
}

}  // namespace

LipschitzReport lipschitz_check(const ProductSpec& spec, const Statistic& phi, double lipschitz,
                                std::size_t trials, std::uint64_t seed, unsigned threads) {
  if (!(lipschitz >= 0.0)) throw DomainError("Lipschitz constant must be nonnegative");
  const std::size_t dim = spec.size();

  if (spec.finite_point_count(kExhaustivePointCap)) {
    const auto points = detail::enumerate_points(spec);
    const std::size_t count = points.size();
    std::vector<double> values(count);
    for (std::size_t k = 0; k < count; ++k) values[k] = phi(points.point(k));
    std::vector<const FiniteMetricSpace*> parts;
    for (const auto& c : spec.components()) parts.push_back(&std::get<FiniteMetricSpace>(c));

    const unsigned workers = detail::worker_count(threads, count);
    std::vector<PairScan> scans(workers);
    // Interleave rows across workers so the triangular work is balanced.
    detail::parallel_chunks(workers, workers, [&](std::size_t begin, std::size_t) {
      PairScan& scan = scans[begin];
      for (std::size_t a = begin; a < count; a += workers) {
        const auto pa = points.point(a);
        for (std::size_t b = a + 1; b < count; ++b) {
          const auto pb = points.point(b);
          double rho = 0.0;
          for (std::size_t i = 0; i < dim; ++i) {
            rho += parts[i]->distance(static_cast<std::size_t>(pa[i]),
                                      static_cast<std::size_t>(pb[i]));
          }
          scan.record(pa, pb, std::abs(values[a] - values[b]), rho, lipschitz);
        }
      }
    });
    return finish(scans, true);
  }

  const detail::ProductSampler sampler(spec);
  const unsigned workers = detail::worker_count(threads, trials);
  std::vector<PairScan> scans(workers);
  const std::size_t per = trials == 0 ? 0 : (trials + workers - 1) / workers;
  detail::parallel_chunks(workers, workers, [&](std::size_t w, std::size_t) {
    PairScan& scan = scans[w];
    std::vector<double> x(dim);
    std::vector<double> y(dim);
    const std::size_t end = std::min(trials, per * (w + 1));
    for (std::size_t k = per * w; k < end; ++k) {
      RandomStream rng(seed, k);
      sampler.draw(rng, x);
      if (k % 2 == 0) {
        sampler.draw(rng, y);
      } else {
        y = x;
        const std::size_t i = static_cast<std::size_t>(rng.next_u64() % dim);
        y[i] = sampler.draw_coordinate(i, rng);
      }
      scan.record(x, y, std::abs(phi(x) - phi(y)), spec.distance(x, y), lipschitz);
    }
  });
  return finish(scans, false);
}

}  // namespace concdiam
