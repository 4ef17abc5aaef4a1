#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "concdiam/errors.hpp"

namespace concdiam::detail {
namespace {

// Arc states. Tree arcs carry the basis; LOWER arcs sit at zero flow and may
// enter; RETIRED marks artificial arcs that have left the basis for good.
enum : std::int8_t { kTree = 0, kLower = 1, kRetired = 2 };

// Orientation of a node's tree arc: UP means the arc runs node -> parent.
enum : std::int8_t { kUp = 1, kDown = -1 };

class TransportationSimplex {
 public:
  TransportationSimplex(std::span<const double> cost, std::size_t m, std::size_t n,
                        std::span<const double> supply, std::span<const double> demand)
      : m_(static_cast<int>(m)),
        n_(static_cast<int>(n)),
        nodes_(m_ + n_),
        root_(nodes_),
        real_arcs_(static_cast<std::int64_t>(m) * static_cast<std::int64_t>(n)) {
    double max_cost = 0.0;
    for (double c : cost) max_cost = std::max(max_cost, c);
    cost_scale_ = max_cost > 0.0 ? max_cost : 1.0;
    cost_.resize(static_cast<std::size_t>(real_arcs_));
    for (std::size_t e = 0; e < cost_.size(); ++e) cost_[e] = cost[e] / cost_scale_;

    // Any simple path through real arcs costs at most nodes_ in scaled units.
    art_cost_ = 2.0 * static_cast<double>(nodes_ + 1);

    const std::size_t total_arcs = static_cast<std::size_t>(real_arcs_) + static_cast<std::size_t>(nodes_);
    flow_.assign(total_arcs, 0.0);
    state_.assign(total_arcs, kLower);
    art_source_.resize(static_cast<std::size_t>(nodes_));
    art_target_.resize(static_cast<std::size_t>(nodes_));

    const std::size_t node_slots = static_cast<std::size_t>(nodes_) + 1;
    parent_.assign(node_slots, -1);
    pred_.assign(node_slots, -1);
    dir_.assign(node_slots, kUp);
    depth_.assign(node_slots, 0);
    pi_.assign(node_slots, 0.0);
    incident_.assign(node_slots, {});

    // Initial basis: every node hangs from the root by its artificial arc.
    // Supply nodes point up with cost 0, demand nodes are fed from the root at
    // the big-M cost. This tree is strongly feasible.
    for (int u = 0; u < nodes_; ++u) {
      const std::int64_t e = real_arcs_ + u;
      const double b = u < m_ ? supply[static_cast<std::size_t>(u)]
                              : -demand[static_cast<std::size_t>(u - m_)];
      parent_[u] = root_;
      pred_[u] = e;
      depth_[u] = 1;
      state_[static_cast<std::size_t>(e)] = kTree;
      if (b >= 0.0) {
        dir_[u] = kUp;
        art_source_[u] = u;
        art_target_[u] = root_;
        flow_[static_cast<std::size_t>(e)] = b;
        pi_[u] = 0.0;
      } else {
        dir_[u] = kDown;
        art_source_[u] = root_;
        art_target_[u] = u;
        flow_[static_cast<std::size_t>(e)] = -b;
        pi_[u] = art_cost_;
      }
      incident_[u].push_back(e);
      incident_[root_].push_back(e);
    }

    block_size_ = std::max<std::int64_t>(
        10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(real_arcs_))));
  }

  std::vector<double> solve() {
    // Pivot cap far above anything seen in practice; reaching it means cycling.
    const std::int64_t max_pivots = 50 * (real_arcs_ + nodes_) + 1000000;
    std::int64_t pivots = 0;
    while (find_entering_arc()) {
      if (++pivots > max_pivots) throw InternalError("transport solver exceeded its pivot budget");
      pivot();
    }
    double artificial = 0.0;
    for (int u = 0; u < nodes_; ++u) artificial += flow_[static_cast<std::size_t>(real_arcs_ + u)];
    if (artificial > 1e-9) {
      throw InternalError("transport problem infeasible: unbalanced marginals (residual " +
                          std::to_string(artificial) + ")");
    }
    return {flow_.begin(), flow_.begin() + real_arcs_};
  }

 private:
  int source(std::int64_t e) const {
    return e < real_arcs_ ? static_cast<int>(e / n_) : art_source_[e - real_arcs_];
  }
  int target(std::int64_t e) const {
    return e < real_arcs_ ? m_ + static_cast<int>(e % n_) : art_target_[e - real_arcs_];
  }
  double cost(std::int64_t e) const {
    if (e < real_arcs_) return cost_[static_cast<std::size_t>(e)];
    return art_source_[e - real_arcs_] == root_ ? art_cost_ : 0.0;
  }

  double reduced_cost(std::int64_t e) const {
    const int i = static_cast<int>(e / n_);
    const int j = m_ + static_cast<int>(e % n_);
    return cost_[static_cast<std::size_t>(e)] + pi_[i] - pi_[j];
  }

  // Block search: scan arcs cyclically from where the last search stopped and
  // take the most negative reduced cost within the first block that has one.
  bool find_entering_arc() {
    double best = -kEpsilon;
    std::int64_t count = block_size_;
    std::int64_t e = next_arc_;
    entering_ = -1;
    for (std::int64_t scanned = 0; scanned < real_arcs_; ++scanned) {
      if (state_[static_cast<std::size_t>(e)] == kLower) {
        const double c = reduced_cost(e);
        if (c < best) {
          best = c;
          entering_ = e;
        }
      }
      if (++e == real_arcs_) e = 0;
      if (--count == 0) {
        if (entering_ >= 0) break;
        count = block_size_;
      }
    }
    next_arc_ = e;
    return entering_ >= 0;
  }

  void pivot() {
    const int first = source(entering_);
    const int second = target(entering_);

    int u = first;
    int v = second;
    while (u != v) {
      if (depth_[u] >= depth_[v]) {
        u = parent_[u];
      } else {
        v = parent_[v];
      }
    }
    const int join = u;

    // Leaving arc: smallest decreasing flow on the cycle. Ties go to the last
    // candidate in cycle order, which keeps the tree strongly feasible.
    double delta = std::numeric_limits<double>::infinity();
    int u_out = -1;
    int side = 0;
    for (int w = first; w != join; w = parent_[w]) {
      if (dir_[w] == kUp) {
        const double d = flow_[static_cast<std::size_t>(pred_[w])];
        if (d < delta) {
          delta = d;
          u_out = w;
          side = 1;
        }
      }
    }
    for (int w = second; w != join; w = parent_[w]) {
      if (dir_[w] == kDown) {
        const double d = flow_[static_cast<std::size_t>(pred_[w])];
        if (d <= delta) {
          delta = d;
          u_out = w;
          side = 2;
        }
      }
    }
    if (side == 0) throw InternalError("transport problem unbounded");

    if (delta > 0.0) {
      flow_[static_cast<std::size_t>(entering_)] += delta;
      for (int w = first; w != join; w = parent_[w]) {
        flow_[static_cast<std::size_t>(pred_[w])] -= dir_[w] * delta;
      }
      for (int w = second; w != join; w = parent_[w]) {
        flow_[static_cast<std::size_t>(pred_[w])] += dir_[w] * delta;
      }
    }

    const std::int64_t leaving = pred_[u_out];
    flow_[static_cast<std::size_t>(leaving)] = 0.0;
    state_[static_cast<std::size_t>(leaving)] = leaving < real_arcs_ ? kLower : kRetired;
    state_[static_cast<std::size_t>(entering_)] = kTree;

    remove_incident(u_out, leaving);
    remove_incident(parent_[u_out], leaving);
    incident_[first].push_back(entering_);
    incident_[second].push_back(entering_);

    const int u_in = side == 1 ? first : second;
    const int v_in = side == 1 ? second : first;
    rehang(u_in, v_in, entering_);
  }

  void remove_incident(int node, std::int64_t arc) {
    auto& list = incident_[node];
    const auto it = std::find(list.begin(), list.end(), arc);
    *it = list.back();
    list.pop_back();
  }

  // Re-roots the subtree cut off by the leaving arc below v_in through `arc`,
  // refreshing parents, depths and potentials.
  void rehang(int u_in, int v_in, std::int64_t arc) {
    stack_.clear();
    stack_.push_back({u_in, v_in, arc});
    while (!stack_.empty()) {
      const Frame f = stack_.back();
      stack_.pop_back();
      parent_[f.node] = f.parent;
      pred_[f.node] = f.arc;
      depth_[f.node] = depth_[f.parent] + 1;
      if (source(f.arc) == f.node) {
        dir_[f.node] = kUp;
        pi_[f.node] = pi_[f.parent] - cost(f.arc);
      } else {
        dir_[f.node] = kDown;
        pi_[f.node] = pi_[f.parent] + cost(f.arc);
      }
      for (const std::int64_t e : incident_[f.node]) {
        if (e == f.arc) continue;
        const int other = source(e) == f.node ? target(e) : source(e);
        stack_.push_back({other, f.node, e});
      }
    }
  }

  struct Frame {
    int node;
    int parent;
    std::int64_t arc;
  };

  static constexpr double kEpsilon = 1e-11;

  int m_;
  int n_;
  int nodes_;
  int root_;
  std::int64_t real_arcs_;
  double cost_scale_ = 1.0;
  double art_cost_ = 0.0;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<std::int8_t> state_;
  std::vector<int> art_source_;
  std::vector<int> art_target_;

  std::vector<int> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<std::int8_t> dir_;
  std::vector<int> depth_;
  std::vector<double> pi_;
  std::vector<std::vector<std::int64_t>> incident_;

  std::int64_t block_size_ = 10;
  std::int64_t next_arc_ = 0;
  std::int64_t entering_ = -1;
  std::vector<Frame> stack_;
};

}  // namespace

std::vector<double> solve_transportation(std::span<const double> cost, std::size_t m, std::size_t n,
                                         std::span<const double> supply,
                                         std::span<const double> demand) {
  if (cost.size() != m * n || supply.size() != m || demand.size() != n) {
    throw InternalError("transport problem dimensions are inconsistent");
  }
  if (m == 0 || n == 0) return {};
  TransportationSimplex solver(cost, m, n, supply, demand);
  return solver.solve();
}

}  // namespace concdiam::detail
