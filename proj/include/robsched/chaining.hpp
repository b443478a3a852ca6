#pragma once

#include <utility>
#include <vector>

#include "robsched/model.hpp"
#include "robsched/rng.hpp"

namespace robsched {

// acyclic set of ordering decisions with incremental transitive closure
class OrderGraph {
  public:
    OrderGraph() = default;
    explicit OrderGraph(int node_count);
    int size() const { return n_; }
    bool ordered(int u, int v) const; // u before v, transitively
    bool has_edge(int u, int v) const;
    // inserts the decision u-before-v; returns false (no change) on cycle
    bool add(int u, int v);
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  private:
    int n_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<char>> reach_;
};

enum class Chaining { Basic, Flexible, Feedback };

// Turns a resource-feasible schedule into a partial order schedule: every
// original min/max start constraint is kept, and per resource unit the
// activities using it form a chain linked by duration-bearing edges.
// Basic picks units at random, Flexible prefers units whose last activity
// is already ordered before the current one (or already chosen for it),
// Feedback is deterministic: precedence-related last, then order-graph
// related last, then a unit whose last was already chosen, then first free.
Pos build_chains(const Instance& inst, const Schedule& s, Chaining policy, Rng& rng,
                 const OrderGraph* og = nullptr);

// longest-path start times over the evaluation edges, clamped at zero
std::vector<double> earliest_start(const Pos& pos, const std::vector<double>& durations);

} // namespace robsched
