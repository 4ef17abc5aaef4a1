#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace concdiam::detail {

/// Exact solver for the balanced transportation problem
///
///   min sum_ij cost[i*n + j] x_ij  s.t.  sum_j x_ij = supply_i,
///                                         sum_i x_ij = demand_j,  x >= 0
///
/// by the primal network simplex method on the bipartite graph plus an
/// artificial root (big-M start, strongly feasible spanning trees, block
/// search pricing). Supplies and demands must be positive and sum to the same
/// total up to rounding. Returns the m*n flow matrix, row-major.
std::vector<double> solve_transportation(std::span<const double> cost, std::size_t m, std::size_t n,
                                         std::span<const double> supply,
                                         std::span<const double> demand);

}  // namespace concdiam::detail
