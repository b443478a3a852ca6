#pragma once

#include <optional>
#include <string>
#include <vector>

#include "robsched/model.hpp"
#include "robsched/rng.hpp"

namespace robsched {

using ActivityList = std::vector<int>; // real activity ids, scheduling order

// Random topological order of the precedence DAG restricted to real
// activities, uniform choice among the currently available ones. Optional
// extra edges (ordering-generation decisions) are honored as well. Throws
// std::runtime_error if the combined relation is cyclic.
ActivityList random_activity_list(const Instance& inst, Rng& rng,
                                  const std::vector<std::pair<int, int>>* extra_edges = nullptr);

struct FirstFailure {
    int activity = -1;
    std::string reason;
};

struct GenOptions {
    int retries = 30;        // random start draws per activity
    double horizon = 0.0;    // 0 => default_horizon(inst)
    bool no_sweep = false; // disable the deterministic window sweep
};

struct GenResult {
    std::optional<Schedule> schedule;
    std::optional<FirstFailure> failure;
    bool feasible() const { return schedule.has_value(); }
};

// Fix start times in list order: draw uniformly from the activity's current
// temporal window, accept the first draw that fits the resource profile,
// re-propagate, and continue. After `retries` failed draws the window is
// swept left to right for the first fitting value (unless no_sweep).
GenResult generate_schedule(const Instance& inst, const ActivityList& list, Rng& rng,
                            const GenOptions& opts = {});

} // namespace robsched
