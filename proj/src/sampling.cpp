#include "sampling.hpp"

#include <algorithm>

namespace concdiam::detail {

AtomTable::AtomTable(std::span<const double> prob) : cdf_(prob.size()) {
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < prob.size(); ++k) {
    acc += prob[k];
    cdf_[k] = acc;
    if (prob[k] > 0.0) last = k;
  }
  // Absorb rounding in the running sum: u < 1 always lands on a positive atom.
  for (std::size_t k = last; k < cdf_.size(); ++k) cdf_[k] = 2.0;
}

std::size_t AtomTable::draw(double u) const {
  return static_cast<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
}

ProductSampler::ProductSampler(const ProductSpec& spec) {
  for (const auto& c : spec.components()) {
    if (const auto* f = std::get_if<FiniteMetricSpace>(&c)) {
      tables_.emplace_back(f->prob());
      gaussians_.push_back({0.0, 0.0});
      finite_.push_back(true);
    } else {
      const auto& g = std::get<GaussianLineSpace>(c);
      tables_.emplace_back(std::span<const double>{});
      gaussians_.push_back({g.mean(), g.stddev()});
      finite_.push_back(false);
    }
  }
}

double ProductSampler::draw_coordinate(std::size_t i, RandomStream& rng) const {
  if (finite_[i]) return static_cast<double>(tables_[i].draw(rng.next_uniform()));
  return gaussians_[i].mean + gaussians_[i].stddev * rng.next_normal();
}

void ProductSampler::draw(RandomStream& rng, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = draw_coordinate(i, rng);
}

MarkovSampler::MarkovSampler(const MarkovProcessSpec& chain) : initial_(chain.initial()) {
  const std::size_t n = chain.states().size();
  rows_.reserve(n);
  for (std::size_t s = 0; s < n; ++s) rows_.emplace_back(chain.row(s));
}

void MarkovSampler::draw(RandomStream& rng, std::span<double> out) const {
  if (out.empty()) return;
  std::size_t s = initial_.draw(rng.next_uniform());
  out[0] = static_cast<double>(s);
  for (std::size_t k = 1; k < out.size(); ++k) {
    s = rows_[s].draw(rng.next_uniform());
    out[k] = static_cast<double>(s);
  }
}

PointList enumerate_points(const ProductSpec& spec) {
  PointList list;
  list.dim = spec.size();
  std::vector<const FiniteMetricSpace*> parts;
  for (const auto& c : spec.components()) parts.push_back(&std::get<FiniteMetricSpace>(c));
  std::vector<std::size_t> digit(list.dim, 0);
  while (true) {
    double p = 1.0;
    for (std::size_t i = 0; i < list.dim; ++i) {
      list.coords.push_back(static_cast<double>(digit[i]));
      p *= parts[i]->prob()[digit[i]];
    }
    list.prob.push_back(p);
    std::size_t i = list.dim;
    while (i > 0) {
      --i;
      if (++digit[i] < parts[i]->size()) break;
      digit[i] = 0;
      if (i == 0) return list;
    }
    if (list.dim == 0) return list;
  }
}

PointList enumerate_trajectories(const MarkovProcessSpec& chain) {
  PointList list;
  list.dim = chain.horizon();
  const std::size_t n = chain.states().size();
  std::vector<double> path(list.dim);
  auto recurse = [&](auto&& self, std::size_t depth, double p) -> void {
    if (depth == list.dim) {
      list.coords.insert(list.coords.end(), path.begin(), path.end());
      list.prob.push_back(p);
      return;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const double q = depth == 0 ? chain.initial()[t]
                                  : chain.transition()(static_cast<std::size_t>(path[depth - 1]), t);
      if (q == 0.0) continue;
      path[depth] = static_cast<double>(t);
      self(self, depth + 1, p * q);
    }
  };
  recurse(recurse, 0, 1.0);
  return list;
}

}  // namespace concdiam::detail
