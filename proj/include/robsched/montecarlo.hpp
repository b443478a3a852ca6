#pragma once

#include <optional>
#include <vector>

#include "robsched/chaining.hpp"
#include "robsched/model.hpp"
#include "robsched/rng.hpp"

namespace robsched {

// realized durations: max(0, d0 + N(0, sigma)) per real activity, dummies 0
std::vector<double> sample_durations(const Instance& inst, Rng& rng);

struct ExecutionResult {
    Schedule schedule;
    double makespan = 0.0; // start of the sink under earliest-start dispatch
    FeasibilityReport report; // original min/max lags + resource cross-check
    bool violated() const { return !report.ok; }
};

// earliest-start execution of the POS at realized durations, then a check of
// the original constraints (max lags are not POS edges and can be violated)
ExecutionResult execute_pos(const Pos& pos, const Instance& inst,
                            const std::vector<double>& durations);

struct EvaluationReport {
    int samples = 0;
    double epsilon = 0.1;
    double fstar = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double quantile = 0.0;                           // (1 - epsilon)-quantile
    std::vector<std::pair<double, double>> quantile_grid; // (eps, quantile)
    double violation_rate = 0.0;          // makespan > fstar, all samples
    double violation_rate_feasible = 0.0; // conditioned on violation-free samples
    double ipr = 0.0;                     // fraction of samples violating a constraint
    std::optional<double> mnpm;           // quantile / lower_bound
    std::vector<double> makespans;        // per-sample, in sample order
};

// n sampled executions; sample i draws from stream derive_stream(seed, i) so
// results do not depend on evaluation order or worker count
EvaluationReport evaluate_pos(const Pos& pos, const Instance& inst, int samples,
                              double epsilon, double fstar, uint64_t seed,
                              std::optional<double> lower_bound = std::nullopt);

// type-1 empirical quantile of a sample at probability p
double empirical_quantile(std::vector<double> values, double p);

// random topological linearization of the POS evaluation DAG, dispatched in
// list order: each start is the max of its POS edge bounds and the previous
// activity's start (order-respecting execution of the partial order)
Schedule random_linearization_schedule(const Pos& pos, const Instance& inst, Rng& rng);

} // namespace robsched
