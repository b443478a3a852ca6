#include "robsched/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robsched {

std::vector<double> sample_durations(const Instance& inst, Rng& rng) {
    const int n = inst.node_count();
    std::vector<double> d(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        if (!inst.is_real(i)) continue;
        const Activity& a = inst.activities[static_cast<std::size_t>(i)];
        d[static_cast<std::size_t>(i)] = std::max(0.0, a.mean_duration + rng.normal(0.0, a.sigma));
    }
    return d;
}

ExecutionResult execute_pos(const Pos& pos, const Instance& inst,
                            const std::vector<double>& durations) {
    ExecutionResult out;
    out.schedule.starts = earliest_start(pos, durations);
    out.makespan = out.schedule.starts[static_cast<std::size_t>(inst.sink())];
    out.report = check_schedule(inst, out.schedule, durations);
    return out;
}

double empirical_quantile(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double np = p * static_cast<double>(values.size());
    auto idx = static_cast<std::size_t>(std::ceil(np - 1e-12)) ;
    if (idx == 0) idx = 1;
    if (idx > values.size()) idx = values.size();
    return values[idx - 1];
}

EvaluationReport evaluate_pos(const Pos& pos, const Instance& inst, int samples,
                              double epsilon, double fstar, uint64_t seed,
                              std::optional<double> lower_bound) {
    if (samples < 1) throw std::invalid_argument("samples must be >= 1");
    EvaluationReport rep;
    rep.samples = samples;
    rep.epsilon = epsilon;
    rep.fstar = fstar;
    rep.makespans.reserve(static_cast<std::size_t>(samples));

    int violated = 0;
    int over = 0;
    int over_feasible = 0;
    double sum = 0.0;
    double sumsq = 0.0;
    for (int i = 0; i < samples; ++i) {
        Rng rng(derive_stream(seed, static_cast<uint64_t>(i)));
        const std::vector<double> d = sample_durations(inst, rng);
        const ExecutionResult ex = execute_pos(pos, inst, d);
        rep.makespans.push_back(ex.makespan);
        sum += ex.makespan;
        sumsq += ex.makespan * ex.makespan;
        if (ex.violated()) ++violated;
        if (ex.makespan > fstar) {
            ++over;
            if (!ex.violated()) ++over_feasible;
        }
    }
    const double n = static_cast<double>(samples);
    rep.mean = sum / n;
    rep.variance = std::max(0.0, sumsq / n - rep.mean * rep.mean);
    rep.quantile = empirical_quantile(rep.makespans, 1.0 - epsilon);
    for (double eps : {0.01, 0.05, 0.1, 0.2})
        rep.quantile_grid.emplace_back(eps, empirical_quantile(rep.makespans, 1.0 - eps));
    rep.violation_rate = static_cast<double>(over) / n;
    const int feasible = samples - violated;
    rep.violation_rate_feasible =
        feasible > 0 ? static_cast<double>(over_feasible) / static_cast<double>(feasible) : 0.0;
    rep.ipr = static_cast<double>(violated) / n;
    if (lower_bound) {
        if (*lower_bound <= 0.0) throw std::invalid_argument("lower bound must be positive");
        rep.mnpm = rep.quantile / *lower_bound;
    }
    return rep;
}

Schedule random_linearization_schedule(const Pos& pos, const Instance& inst, Rng& rng) {
    const int n = pos.node_count;
    std::vector<std::vector<const PosEdge*>> incoming(static_cast<std::size_t>(n));
    std::vector<int> indeg(static_cast<std::size_t>(n), 0);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const PosEdge& e : pos.edges) {
        if (!evaluation_edge(e)) continue;
        adj[static_cast<std::size_t>(e.from)].push_back(e.to);
        incoming[static_cast<std::size_t>(e.to)].push_back(&e);
        ++indeg[static_cast<std::size_t>(e.to)];
    }
    std::vector<int> available;
    for (int v = 0; v < n; ++v)
        if (indeg[static_cast<std::size_t>(v)] == 0) available.push_back(v);

    const std::vector<double> d = nominal_durations(inst);
    Schedule s;
    s.starts.assign(static_cast<std::size_t>(n), 0.0);
    double clock = 0.0;
    int emitted = 0;
    while (!available.empty()) {
        const std::size_t pick =
            available.size() == 1
                ? 0
                : static_cast<std::size_t>(rng.uniform_int(0, static_cast<int64_t>(available.size()) - 1));
        const int v = available[pick];
        available[pick] = available.back();
        available.pop_back();
        double st = clock;
        for (const PosEdge* e : incoming[static_cast<std::size_t>(v)])
            st = std::max(st, s.starts[static_cast<std::size_t>(e->from)] + e->lag +
                                  (e->duration_bearing ? d[static_cast<std::size_t>(e->from)] : 0.0));
        s.starts[static_cast<std::size_t>(v)] = st;
        clock = st;
        ++emitted;
        for (int w : adj[static_cast<std::size_t>(v)])
            if (--indeg[static_cast<std::size_t>(w)] == 0) available.push_back(w);
    }
    if (emitted != n) throw std::logic_error("POS evaluation graph has a cycle");
    return s;
}

} // namespace robsched
