#include "robsched/chaining.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace robsched {

OrderGraph::OrderGraph(int node_count)
    : n_(node_count),
      reach_(static_cast<std::size_t>(node_count),
             std::vector<char>(static_cast<std::size_t>(node_count), 0)) {}

bool OrderGraph::ordered(int u, int v) const {
    return reach_[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] != 0;
}

bool OrderGraph::has_edge(int u, int v) const {
    return std::find(edges_.begin(), edges_.end(), std::make_pair(u, v)) != edges_.end();
}

bool OrderGraph::add(int u, int v) {
    if (u == v || ordered(v, u)) return false;
    if (!has_edge(u, v)) edges_.emplace_back(u, v);
    if (ordered(u, v)) return true;
    for (int x = 0; x < n_; ++x) {
        if (x != u && !ordered(x, u)) continue;
        auto& row = reach_[static_cast<std::size_t>(x)];
        for (int y = 0; y < n_; ++y)
            if (y == v || ordered(v, y)) row[static_cast<std::size_t>(y)] = 1;
    }
    return true;
}

namespace {

struct UnitState {
    int last = 0;      // dummy source when the chain is empty
    double end = 0.0;  // completion time of the chain so far
};

constexpr double kEps = 1e-9;

} // namespace

Pos build_chains(const Instance& inst, const Schedule& s, Chaining policy, Rng& rng,
                 const OrderGraph* og) {
    const int n = inst.node_count();
    Pos pos;
    pos.node_count = n;
    std::set<std::pair<int, int>> covered; // duration-bearing lag>=0 precedence pairs
    for (const TemporalConstraint& c : inst.constraints) {
        if (c.kind != LagKind::Min) continue;
        pos.edges.push_back({c.from, c.to, PosEdge::Kind::Precedence, c.lag, c.duration_bearing});
        if (c.duration_bearing && c.lag >= 0.0) covered.insert({c.from, c.to});
    }

    Reachability prec(n, precedence_adjacency(inst));

    std::vector<int> order;
    for (int a = 0; a < n; ++a)
        if (inst.is_real(a)) order.push_back(a);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double sa = s.starts[static_cast<std::size_t>(a)];
        const double sb = s.starts[static_cast<std::size_t>(b)];
        if (sa != sb) return sa < sb;
        return a < b;
    });

    std::vector<std::vector<UnitState>> units(static_cast<std::size_t>(inst.resource_count()));
    pos.chains.assign(static_cast<std::size_t>(inst.resource_count()), {});
    for (int k = 0; k < inst.resource_count(); ++k) {
        units[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(inst.capacities[static_cast<std::size_t>(k)]));
        pos.chains[static_cast<std::size_t>(k)].resize(static_cast<std::size_t>(inst.capacities[static_cast<std::size_t>(k)]));
    }

    for (int a : order) {
        const Activity& act = inst.activities[static_cast<std::size_t>(a)];
        const double start = s.starts[static_cast<std::size_t>(a)];
        std::set<int> used; // chain predecessors already linked to a
        for (int k = 0; k < inst.resource_count(); ++k) {
            const int need = act.demands[static_cast<std::size_t>(k)];
            if (need == 0) continue;
            auto& row = units[static_cast<std::size_t>(k)];
            std::vector<int> avail;
            for (std::size_t u = 0; u < row.size(); ++u)
                if (row[u].end <= start + kEps) avail.push_back(static_cast<int>(u));
            if (static_cast<int>(avail.size()) < need)
                throw std::logic_error("chaining ran out of available resource units");

            int first_last = -1; // last activity of the first unit picked for (a, k)
            for (int picked = 0; picked < need; ++picked) {
                std::size_t sel = 0;
                if (policy == Chaining::Basic) {
                    sel = avail.size() == 1
                              ? 0
                              : static_cast<std::size_t>(rng.uniform_int(0, static_cast<int64_t>(avail.size()) - 1));
                } else if (policy == Chaining::Feedback) {
                    auto tier = [&](int u) {
                        const int last = row[static_cast<std::size_t>(u)].last;
                        if (picked > 0) return last == first_last ? 0 : 1;
                        if (prec.reaches(last, a)) return 0;
                        if (og && og->ordered(last, a)) return 1;
                        return 2;
                    };
                    int best_tier = tier(avail[0]);
                    sel = 0;
                    for (std::size_t i = 1; i < avail.size(); ++i) {
                        const int t = tier(avail[i]);
                        if (t < best_tier) {
                            best_tier = t;
                            sel = i; // first unit of the best tier, canonical order
                        }
                    }
                } else {
                    auto tier = [&](int u) {
                        const int last = row[static_cast<std::size_t>(u)].last;
                        if (prec.reaches(last, a)) return 0;
                        if (used.count(last)) return 1;
                        return 2;
                    };
                    int best_tier = 3;
                    std::vector<std::size_t> best;
                    for (std::size_t i = 0; i < avail.size(); ++i) {
                        const int t = tier(avail[i]);
                        if (t < best_tier) {
                            best_tier = t;
                            best.clear();
                        }
                        if (t == best_tier) best.push_back(i);
                    }
                    sel = best.size() == 1
                              ? best.front()
                              : best[static_cast<std::size_t>(
                                    rng.uniform_int(0, static_cast<int64_t>(best.size()) - 1))];
                }
                const int u = avail[sel];
                if (picked == 0) first_last = row[static_cast<std::size_t>(u)].last;
                avail.erase(avail.begin() + static_cast<std::ptrdiff_t>(sel));
                UnitState& st = row[static_cast<std::size_t>(u)];
                if (!used.count(st.last) && !covered.count({st.last, a}))
                    pos.edges.push_back({st.last, a, PosEdge::Kind::Chain, 0.0, true});
                used.insert(st.last);
                st.last = a;
                st.end = start + act.mean_duration;
                pos.chains[static_cast<std::size_t>(k)][static_cast<std::size_t>(u)].push_back(a);
            }
        }
    }
    return pos;
}

std::vector<double> earliest_start(const Pos& pos, const std::vector<double>& durations) {
    const int n = pos.node_count;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    std::vector<std::vector<const PosEdge*>> incoming(static_cast<std::size_t>(n));
    for (const PosEdge& e : pos.edges) {
        if (!evaluation_edge(e)) continue;
        adj[static_cast<std::size_t>(e.from)].push_back(e.to);
        incoming[static_cast<std::size_t>(e.to)].push_back(&e);
    }
    std::vector<int> topo = topological_order(n, adj);
    if (topo.empty() && n > 0) throw std::logic_error("POS evaluation graph has a cycle");
    std::vector<double> st(static_cast<std::size_t>(n), 0.0);
    for (int v : topo) {
        double best = 0.0;
        for (const PosEdge* e : incoming[static_cast<std::size_t>(v)]) {
            const double cand = st[static_cast<std::size_t>(e->from)] + e->lag +
                                (e->duration_bearing ? durations[static_cast<std::size_t>(e->from)] : 0.0);
            best = std::max(best, cand);
        }
        st[static_cast<std::size_t>(v)] = best;
    }
    return st;
}

} // namespace robsched
