#include "robsched/search.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace robsched {

ActivityList shift_ahead_move(const ActivityList& al, int failing, const Reachability& closure,
                              Rng& rng, bool* changed) {
    *changed = false;
    const auto it = std::find(al.begin(), al.end(), failing);
    if (it == al.end()) return al;
    const int p = static_cast<int>(it - al.begin());
    int last_pred = -1;
    for (int k = 0; k < p; ++k)
        if (closure.reaches(al[static_cast<std::size_t>(k)], failing)) last_pred = k;
    if (last_pred + 1 > p - 1) return al; // already as early as it can go
    const int j = static_cast<int>(rng.uniform_int(last_pred + 1, p - 1));
    ActivityList out = al;
    out.erase(out.begin() + p);
    out.insert(out.begin() + j, failing);
    *changed = true;
    return out;
}

ActivityList swap_move(const ActivityList& al, const Reachability& closure, Rng& rng,
                       bool* changed) {
    *changed = false;
    const int n = static_cast<int>(al.size());
    if (n < 2) return al;
    const long attempts = static_cast<long>(n) * n;
    for (long t = 0; t < attempts; ++t) {
        int i = static_cast<int>(rng.uniform_int(0, n - 1));
        int j = static_cast<int>(rng.uniform_int(0, n - 1));
        if (i == j) continue;
        if (i > j) std::swap(i, j);
        const int b = al[static_cast<std::size_t>(i)];
        const int c = al[static_cast<std::size_t>(j)];
        if (closure.reaches(b, c)) continue;
        bool valid = true;
        for (int k = i + 1; k < j && valid; ++k) {
            const int mid = al[static_cast<std::size_t>(k)];
            if (closure.reaches(mid, c) || closure.reaches(b, mid)) valid = false;
        }
        if (!valid) continue;
        ActivityList out = al;
        std::swap(out[static_cast<std::size_t>(i)], out[static_cast<std::size_t>(j)]);
        *changed = true;
        return out;
    }
    return al;
}

std::vector<std::pair<int, int>> pairs_selection(const Instance& inst) {
    const Reachability closure = precedence_closure(inst);
    std::vector<std::pair<int, int>> pairs;
    for (int a = 1; a < inst.sink(); ++a) {
        for (int b = a + 1; b < inst.sink(); ++b) {
            if (closure.related(a, b)) continue;
            const Activity& ra = inst.activities[static_cast<std::size_t>(a)];
            const Activity& rb = inst.activities[static_cast<std::size_t>(b)];
            bool overload = false;
            for (int k = 0; k < inst.resource_count() && !overload; ++k)
                overload = ra.demands[static_cast<std::size_t>(k)] + rb.demands[static_cast<std::size_t>(k)] >
                           inst.capacities[static_cast<std::size_t>(k)];
            if (overload) pairs.emplace_back(a, b);
        }
    }
    return pairs;
}

namespace {

// fitness of one ordered sample: schedule the list under the instance plus a
// hard (first before second) edge, chain deterministically, evaluate
std::optional<double> ordered_sample_fitness(const Instance& inst, int first, int second,
                                             const ActivityList& list, Rng& rng,
                                             const SearchConfig& config) {
    Instance aug = inst;
    aug.constraints.push_back({first, second, LagKind::Min, 0.0, false});
    GenOptions gen{config.retries, config.horizon, config.no_sweep};
    GenResult outcome = generate_schedule(aug, list, rng, gen);
    if (!outcome.feasible()) return std::nullopt;
    OrderGraph empty(aug.node_count());
    Rng chain_rng(0); // feedback chaining is deterministic
    Pos pos = build_chains(aug, *outcome.schedule, Chaining::Feedback, chain_rng, &empty);
    return pos_fitness(pos, aug, config.rule, config.epsilon);
}

ActivityList with_order(const ActivityList& t, int first, int second) {
    ActivityList out = t;
    auto fi = std::find(out.begin(), out.end(), first);
    auto si = std::find(out.begin(), out.end(), second);
    if (si < fi) std::iter_swap(fi, si);
    return out;
}

} // namespace

OrderingResult generate_ordering(const Instance& inst,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 const SearchConfig& config) {
    const int n = inst.node_count();
    OrderingResult res;
    res.graph = OrderGraph(n);

    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const auto [a, b] = pairs[pi];
        Rng rng(derive_stream(config.seed, 1 + static_cast<uint64_t>(pi)));
        int wins = 0;
        int bilateral = 0;
        for (int s = 0; s < config.og_samples; ++s) {
            const ActivityList t = random_activity_list(inst, rng);
            const auto f_ab = ordered_sample_fitness(inst, a, b, with_order(t, a, b), rng, config);
            const auto f_ba = ordered_sample_fitness(inst, b, a, with_order(t, b, a), rng, config);
            if (f_ab && f_ba) {
                ++bilateral;
                if (*f_ab < *f_ba) ++wins;
            }
        }
        OrderDecision dec;
        dec.a = a;
        dec.b = b;
        dec.samples_used = bilateral;
        dec.index_value = bilateral > 0 ? static_cast<double>(wins) / bilateral : 0.5;
        if (static_cast<double>(bilateral) >= config.og_samples / 4.0) {
            if (dec.index_value > config.og_threshold) dec.decision = 1;
            else if (dec.index_value < 1.0 - config.og_threshold) dec.decision = -1;
        }
        res.decisions.push_back(dec);
    }

    // insert by confidence; skip anything that would close a cycle with the
    // problem precedence or earlier decisions
    const Reachability prec = precedence_closure(inst);
    std::vector<std::vector<char>> comb(static_cast<std::size_t>(n),
                                        std::vector<char>(static_cast<std::size_t>(n), 0));
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            comb[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = prec.reaches(u, v) ? 1 : 0;

    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < res.decisions.size(); ++i)
        if (res.decisions[i].decision != 0) idx.push_back(i);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(res.decisions[x].index_value - 0.5) >
               std::abs(res.decisions[y].index_value - 0.5);
    });
    for (std::size_t i : idx) {
        OrderDecision& dec = res.decisions[i];
        const int u = dec.decision > 0 ? dec.a : dec.b;
        const int v = dec.decision > 0 ? dec.b : dec.a;
        if (comb[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]) continue;
        res.graph.add(u, v);
        dec.inserted = true;
        for (int x = 0; x < n; ++x) {
            if (x != u && !comb[static_cast<std::size_t>(x)][static_cast<std::size_t>(u)]) continue;
            for (int y = 0; y < n; ++y)
                if (y == v || comb[static_cast<std::size_t>(v)][static_cast<std::size_t>(y)])
                    comb[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = 1;
        }
    }
    return res;
}

RobustResult robust_local_search(const Instance& inst, const SearchConfig& config) {
    RobustResult res;
    res.rule = config.rule;
    res.epsilon = config.epsilon;
    res.seed = config.seed;
    chebyshev_factor(config.epsilon); // validates epsilon up front

    OrderGraph og(inst.node_count());
    if (config.ordering) {
        OrderingResult ores = generate_ordering(inst, pairs_selection(inst), config);
        og = std::move(ores.graph);
        res.decisions = std::move(ores.decisions);
    }
    std::vector<std::vector<int>> adj = precedence_adjacency(inst);
    for (const auto& [u, v] : og.edges()) adj[static_cast<std::size_t>(u)].push_back(v);
    const Reachability closure(inst.node_count(), adj);

    Rng rng(derive_stream(config.seed, 0));
    const GenOptions gen{config.retries, config.horizon, config.no_sweep};
    const std::vector<std::pair<int, int>>* extra = og.edges().empty() ? nullptr : &og.edges();
    const OrderGraph* feedback_og = config.chaining == Chaining::Feedback ? &og : nullptr;
    const int max_iter = std::max(1, config.max_iterations);

    ActivityList al = random_activity_list(inst, rng, extra);
    bool state_feasible = false;
    double s_now = std::numeric_limits<double>::infinity();
    int failing = -1;
    int feasible_iters = 0;

    for (int iter = 1; iter <= max_iter; ++iter) {
        TraceEntry te;
        te.iteration = iter;
        te.state_feasible = state_feasible;
        te.s_now = s_now;
        ActivityList cand;
        bool changed = false;
        if (iter == 1) {
            cand = al;
            changed = true;
            te.move = 'i';
        } else if (state_feasible) {
            cand = swap_move(al, closure, rng, &changed);
            te.move = 's';
        } else {
            cand = shift_ahead_move(al, failing, closure, rng, &changed);
            te.move = 'h';
        }
        te.move_changed = changed;

        GenResult outcome = generate_schedule(inst, cand, rng, gen);
        te.neighbor_feasible = outcome.feasible();
        if (outcome.feasible()) {
            Pos pos = build_chains(inst, *outcome.schedule, config.chaining, rng, feedback_og);
            const double s_star = pos_fitness(pos, inst, config.rule, config.epsilon);
            te.s_star = s_star;
            const bool accept = !state_feasible || s_star <= s_now;
            te.accepted = accept;
            if (s_star <= res.robust_makespan) {
                res.robust_makespan = s_star;
                res.pos = std::move(pos);
                res.feasible_found = true;
            }
            if (accept) {
                al = std::move(cand);
                state_feasible = true;
                s_now = s_star;
            }
        } else {
            const int new_failing = outcome.failure->activity;
            if (state_feasible) {
                const double draw = rng.uniform01();
                te.escape_draw = draw;
                const bool accept = draw < config.escape_probability;
                te.accepted = accept;
                if (accept) {
                    al = std::move(cand);
                    state_feasible = false;
                    failing = new_failing;
                    s_now = std::numeric_limits<double>::infinity();
                }
            } else {
                te.accepted = true;
                al = std::move(cand);
                failing = new_failing;
            }
        }
        if (state_feasible) ++feasible_iters;
        if (config.record_trace) res.trace.push_back(te);
    }
    res.iterations_used = max_iter;
    res.feasible_fraction = static_cast<double>(feasible_iters) / max_iter;
    return res;
}

} // namespace robsched
