#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "concdiam/random.hpp"
#include "concdiam/spaces.hpp"

namespace concdiam::detail {

/// Inverse-CDF table over a finite law. Zero-probability atoms are never drawn.
class AtomTable {
 public:
  explicit AtomTable(std::span<const double> prob);
  std::size_t draw(double u) const;

 private:
  std::vector<double> cdf_;
};

/// Draws product points coordinate by coordinate from a stream.
class ProductSampler {
 public:
  explicit ProductSampler(const ProductSpec& spec);

  std::size_t size() const noexcept { return tables_.size(); }
  double draw_coordinate(std::size_t i, RandomStream& rng) const;
  void draw(RandomStream& rng, std::span<double> out) const;

 private:
  struct Gaussian {
    double mean;
    double stddev;
  };
  // One of the two is used per coordinate.
  std::vector<AtomTable> tables_;
  std::vector<Gaussian> gaussians_;
  std::vector<bool> finite_;
};

/// Draws Markov trajectories (state indices as doubles).
class MarkovSampler {
 public:
  explicit MarkovSampler(const MarkovProcessSpec& chain);
  void draw(RandomStream& rng, std::span<double> out) const;

 private:
  AtomTable initial_;
  std::vector<AtomTable> rows_;
};

/// Every point of an all-finite product with its probability, in mixed-radix
/// order (last coordinate fastest). Caller checks the size first.
struct PointList {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::vector<double> prob;

  std::size_t size() const { return prob.size(); }
  Coordinates point(std::size_t k) const { return {coords.data() + k * dim, dim}; }
};

PointList enumerate_points(const ProductSpec& spec);

/// Positive-probability trajectories of a chain.
PointList enumerate_trajectories(const MarkovProcessSpec& chain);

}  // namespace concdiam::detail
