#include "robsched/schedule_gen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "robsched/temporal.hpp"

namespace robsched {

ActivityList random_activity_list(const Instance& inst, Rng& rng,
                                  const std::vector<std::pair<int, int>>* extra_edges) {
    const int n = inst.node_count();
    std::vector<std::vector<int>> adj = precedence_adjacency(inst);
    if (extra_edges) {
        for (const auto& [u, v] : *extra_edges) adj[u].push_back(v);
    }
    std::vector<int> indeg(n, 0);
    for (int u = 0; u < n; ++u)
        for (int v : adj[u]) ++indeg[v];

    std::vector<int> available;
    for (int u = 0; u < n; ++u)
        if (indeg[u] == 0) available.push_back(u);

    ActivityList order;
    order.reserve(n);
    int emitted = 0;
    while (!available.empty()) {
        const std::size_t pick =
            available.size() == 1
                ? 0
                : static_cast<std::size_t>(rng.uniform_int(0, static_cast<int64_t>(available.size()) - 1));
        const int u = available[pick];
        available[pick] = available.back();
        available.pop_back();
        ++emitted;
        if (inst.is_real(u)) order.push_back(u);
        for (int v : adj[u])
            if (--indeg[v] == 0) available.push_back(v);
    }
    if (emitted != n) throw std::runtime_error("precedence relation is cyclic");
    return order;
}

namespace {

// integer resource usage profile over bucket [t, t+1)
class ResourceProfile {
  public:
    ResourceProfile(const Instance& inst, int horizon)
        : inst_(inst), horizon_(horizon),
          usage_(inst.resource_count(), std::vector<int>(static_cast<std::size_t>(horizon) + 1, 0)) {}

    bool fits(int a, int start) const {
        const Activity& act = inst_.activities[static_cast<std::size_t>(a)];
        const int len = duration_buckets(act);
        for (int k = 0; k < inst_.resource_count(); ++k) {
            const int need = act.demands[static_cast<std::size_t>(k)];
            if (need == 0) continue;
            const auto& row = usage_[static_cast<std::size_t>(k)];
            for (int t = start; t < start + len; ++t) {
                if (t > horizon_) break;
                if (row[static_cast<std::size_t>(t)] + need > inst_.capacities[static_cast<std::size_t>(k)])
                    return false;
            }
        }
        return true;
    }

    void place(int a, int start) {
        const Activity& act = inst_.activities[static_cast<std::size_t>(a)];
        const int len = duration_buckets(act);
        for (int k = 0; k < inst_.resource_count(); ++k) {
            const int need = act.demands[static_cast<std::size_t>(k)];
            if (need == 0) continue;
            auto& row = usage_[static_cast<std::size_t>(k)];
            for (int t = start; t < start + len; ++t) {
                if (t > horizon_) break;
                row[static_cast<std::size_t>(t)] += need;
            }
        }
    }

    static int duration_buckets(const Activity& act) {
        return static_cast<int>(std::ceil(act.mean_duration - 1e-9));
    }

  private:
    const Instance& inst_;
    int horizon_;
    std::vector<std::vector<int>> usage_;
};

} // namespace

GenResult generate_schedule(const Instance& inst, const ActivityList& list, Rng& rng,
                            const GenOptions& opts) {
    GenResult out;
    const double horizon = opts.horizon > 0.0 ? opts.horizon : default_horizon(inst);
    auto built = build_and_close(inst, horizon);
    if (std::holds_alternative<TemporalInfeasible>(built)) {
        out.failure = FirstFailure{-1, std::get<TemporalInfeasible>(built).message};
        return out;
    }
    DistanceGraph g = std::move(std::get<DistanceGraph>(built));
    ResourceProfile profile(inst, static_cast<int>(horizon));

    for (int a : list) {
        const int lo = static_cast<int>(std::ceil(g.est(a) - 1e-9));
        const int hi = static_cast<int>(std::floor(g.lst(a) + 1e-9));
        if (lo > hi) {
            out.failure = FirstFailure{a, "empty temporal window"};
            return out;
        }
        int chosen = -1;
        for (int attempt = 0; attempt < opts.retries; ++attempt) {
            const int t = static_cast<int>(rng.uniform_int(lo, hi));
            if (profile.fits(a, t)) {
                chosen = t;
                break;
            }
        }
        if (chosen < 0 && !opts.no_sweep) {
            for (int t = lo; t <= hi; ++t) {
                if (profile.fits(a, t)) {
                    chosen = t;
                    break;
                }
            }
        }
        if (chosen < 0) {
            out.failure = FirstFailure{a, "no resource-feasible start in window"};
            return out;
        }
        if (!g.fix_start(a, static_cast<double>(chosen))) {
            out.failure = FirstFailure{a, "temporal propagation failed"};
            return out;
        }
        profile.place(a, chosen);
    }

    Schedule s;
    s.starts.assign(static_cast<std::size_t>(inst.node_count()), 0.0);
    for (int i = 0; i < inst.node_count(); ++i) s.starts[static_cast<std::size_t>(i)] = g.est(i);
    out.schedule = std::move(s);
    return out;
}

} // namespace robsched
