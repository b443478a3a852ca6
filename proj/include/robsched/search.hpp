#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "robsched/chaining.hpp"
#include "robsched/model.hpp"
#include "robsched/rng.hpp"
#include "robsched/rules.hpp"
#include "robsched/schedule_gen.hpp"

namespace robsched {

struct SearchConfig {
    Rule rule = Rule::Gnla;
    double epsilon = 0.1;
    int max_iterations = 1000; // fitness evaluations, the initial list included
    double escape_probability = 0.01;
    int retries = 30; // schedule-generation draws per activity
    Chaining chaining = Chaining::Basic;
    bool ordering = false; // run ordering generation first
    int og_samples = 100;  // sampled lists per selected pair
    double og_threshold = 0.6; // index-value decision threshold
    uint64_t seed = 1;
    bool record_trace = false;
    bool no_sweep = false;
    double horizon = 0.0; // 0 => default
};

struct TraceEntry {
    int iteration = 0;
    bool state_feasible = false; // current list was feasible before the move
    char move = 'i';             // 'i' initial, 's' swap, 'h' shift-ahead
    bool move_changed = false;
    bool neighbor_feasible = false;
    double s_star = 0.0;      // fitness of the neighbor, when feasible
    double s_now = 0.0;       // incumbent fitness, valid when state_feasible
    bool accepted = false;
    double escape_draw = -1.0; // uniform draw, set when feasible state met an infeasible neighbor
};

struct OrderDecision {
    int a = -1;
    int b = -1;
    int decision = 0;        // +1: a before b, -1: b before a, 0: undecided
    double index_value = 0.0;
    int samples_used = 0;    // bilaterally feasible sample pairs
    bool inserted = false;
};

struct RobustResult {
    bool feasible_found = false;
    double robust_makespan = std::numeric_limits<double>::infinity();
    Pos pos;
    Rule rule = Rule::Gnla;
    double epsilon = 0.1;
    uint64_t seed = 0;
    int iterations_used = 0;
    double feasible_fraction = 0.0;
    std::vector<TraceEntry> trace;
    std::vector<OrderDecision> decisions;
};

// failing moved to a uniformly random earlier position that keeps every
// closure predecessor before it; unchanged (flag false) when none exists
ActivityList shift_ahead_move(const ActivityList& al, int failing, const Reachability& closure,
                              Rng& rng, bool* changed);

// uniformly random order-preserving transposition, found by rejection over
// |al|^2 random pairs; unchanged (flag false) when none was found
ActivityList swap_move(const ActivityList& al, const Reachability& closure, Rng& rng,
                       bool* changed);

// unordered real pairs with no precedence path either way that overload some
// resource together
std::vector<std::pair<int, int>> pairs_selection(const Instance& inst);

struct OrderingResult {
    OrderGraph graph;
    std::vector<OrderDecision> decisions;
};

OrderingResult generate_ordering(const Instance& inst,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 const SearchConfig& config);

RobustResult robust_local_search(const Instance& inst, const SearchConfig& config);

} // namespace robsched
