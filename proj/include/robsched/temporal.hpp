#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "robsched/model.hpp"

namespace robsched {

// Dense all-pairs distance graph over activity start times.
// weight(i, j) is an upper bound on st(j) - st(i); MIN lag (i,j,T) adds
// weight(j, i) = -T, MAX lag (i,j,T) adds weight(i, j) = T. The source is
// anchored at 0 and every start is confined to [0, horizon].
class DistanceGraph {
public:
    DistanceGraph() = default;
    DistanceGraph(int n, double horizon);

    int size() const { return n_; }
    double horizon() const { return horizon_; }

    double weight(int i, int j) const { return w_[static_cast<size_t>(i) * n_ + j]; }
    void add_edge(int i, int j, double v); // weight(i,j) = min(existing, v)

    // Floyd-Warshall closure; false if a negative cycle exists.
    bool close();

    // Pin st(a) = t and restore closure incrementally (single O(n^2) pass
    // through the two new edges). false => inconsistent; graph is then stale.
    bool fix_start(int a, double t);

    double est(int i) const { return -weight(i, 0); }
    double lst(int i) const { return weight(0, i); }

    // one witness cycle with negative length, if close() failed
    std::vector<int> negative_cycle() const;

private:
    double& at(int i, int j) { return w_[static_cast<size_t>(i) * n_ + j]; }
    int n_ = 0;
    double horizon_ = 0.0;
    std::vector<double> w_;
    std::vector<int> nxt_; // successor matrix for cycle reconstruction
};

struct TemporalInfeasible {
    std::string message;
    std::vector<int> cycle;
};

// Serial upper bound on any makespan: total ceil durations plus positive lags.
double default_horizon(const Instance& inst);

std::variant<DistanceGraph, TemporalInfeasible>
build_and_close(const Instance& inst, double horizon);

struct Window {
    double est = 0.0;
    double lst = 0.0;
};

std::vector<Window> windows(const DistanceGraph& g);

// Pure variant of DistanceGraph::fix_start.
std::variant<DistanceGraph, TemporalInfeasible>
fix_start(const DistanceGraph& g, int a, double t);

// Full re-closure, used as the debug oracle for the incremental update.
bool reclose_full(DistanceGraph& g);

} // namespace robsched
