#include "robsched/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace robsched {

namespace {

constexpr double kEps = 1e-9;

std::string fmt(const char* prefix, int a, const char* mid = nullptr, int b = -1) {
    std::ostringstream os;
    os << prefix << a;
    if (mid) os << mid << b;
    return os.str();
}

} // namespace

ValidationResult validate_instance(Instance& inst) {
    ValidationResult r;
    auto& issues = r.issues;

    int n = inst.node_count();
    if (n < 2) {
        issues.push_back("instance needs at least the two dummy activities");
        return r;
    }
    int nk = inst.resource_count();

    for (int i = 0; i < n; ++i) {
        const Activity& a = inst.activities[i];
        if (a.id != i)
            issues.push_back(fmt("activity ids must be contiguous from 0; position ", i, " has id ", a.id));
        if (a.mean_duration < 0.0)
            issues.push_back(fmt("activity ", a.id) + " has negative duration");
        if (a.sigma < 0.0)
            issues.push_back(fmt("activity ", a.id) + " has negative sigma");
        if (static_cast<int>(a.demands.size()) != nk)
            issues.push_back(fmt("activity ", a.id) + " demand vector size " +
                             std::to_string(a.demands.size()) + " != resource count " + std::to_string(nk));
    }
    for (int k = 0; k < nk; ++k)
        if (inst.capacities[k] <= 0)
            issues.push_back(fmt("resource ", k, " has non-positive capacity ", inst.capacities[k]));

    for (int i = 0; i < n && i < static_cast<int>(inst.activities.size()); ++i) {
        const Activity& a = inst.activities[i];
        if (a.id != i) continue;
        for (int k = 0; k < nk && k < static_cast<int>(a.demands.size()); ++k) {
            if (a.demands[k] < 0)
                issues.push_back(fmt("activity ", a.id, " has negative demand on resource ", k));
            else if (a.demands[k] > inst.capacities[k])
                issues.push_back(fmt("activity ", a.id, " demands ") + std::to_string(a.demands[k]) +
                                 " of resource " + std::to_string(k) + " but capacity is " +
                                 std::to_string(inst.capacities[k]));
        }
    }

    for (int d : {inst.source(), inst.sink()}) {
        if (d >= static_cast<int>(inst.activities.size())) continue;
        const Activity& a = inst.activities[d];
        if (a.mean_duration != 0.0 || a.sigma != 0.0)
            issues.push_back(fmt("dummy activity ", d) + " must have zero duration and sigma");
        for (int k = 0; k < static_cast<int>(a.demands.size()); ++k)
            if (a.demands[k] != 0)
                issues.push_back(fmt("dummy activity ", d) + " must not demand resources");
    }

    for (const TemporalConstraint& c : inst.constraints) {
        if (c.from < 0 || c.from >= n || c.to < 0 || c.to >= n)
            issues.push_back(fmt("constraint references unknown activity: ", c.from, " -> ", c.to));
        else if (c.from == c.to)
            issues.push_back(fmt("constraint from activity ", c.from) + " to itself");
        if (c.duration_bearing && c.kind != LagKind::Min)
            issues.push_back(fmt("constraint ", c.from, " -> ", c.to) + " is duration-bearing but not a MIN lag");
    }

    r.ok = issues.empty();
    if (!r.ok) return r;

    // normalization: anchor reals without MIN edges to the dummies
    std::vector<char> has_in(n, 0), has_out(n, 0);
    for (const TemporalConstraint& c : inst.constraints) {
        if (c.kind != LagKind::Min) continue;
        has_out[c.from] = 1;
        has_in[c.to] = 1;
    }
    for (int i = 1; i < inst.sink(); ++i) {
        if (!has_in[i])
            inst.constraints.push_back({inst.source(), i, LagKind::Min, 0.0, false});
        if (!has_out[i])
            inst.constraints.push_back({i, inst.sink(), LagKind::Min, 0.0, true});
    }
    return r;
}

std::vector<double> nominal_durations(const Instance& inst) {
    std::vector<double> d(inst.node_count());
    for (int i = 0; i < inst.node_count(); ++i) d[i] = inst.activities[i].mean_duration;
    return d;
}

FeasibilityReport check_schedule(const Instance& inst, const Schedule& s,
                                 const std::vector<double>& durations) {
    FeasibilityReport rep;

    for (const TemporalConstraint& c : inst.constraints) {
        double gap = s.starts[c.to] - s.starts[c.from];
        double bound = c.lag + (c.duration_bearing ? durations[c.from] : 0.0);
        if (c.kind == LagKind::Min) {
            if (gap < bound - kEps) rep.temporal.push_back({c, bound - gap});
        } else {
            if (gap > c.lag + kEps) rep.temporal.push_back({c, gap - c.lag});
        }
    }

    // event sweep per resource over half-open usage intervals
    for (int k = 0; k < inst.resource_count(); ++k) {
        std::map<double, int> delta;
        for (int i = 1; i < inst.sink(); ++i) {
            int d = inst.activities[i].demands[k];
            if (d <= 0 || durations[i] <= 0.0) continue;
            delta[s.starts[i]] += d;
            delta[s.starts[i] + durations[i]] -= d;
        }
        int usage = 0;
        for (const auto& [t, dd] : delta) {
            usage += dd;
            if (usage > inst.capacities[k])
                rep.resource.push_back({k, t, usage, inst.capacities[k]});
        }
    }

    double mk = 0.0;
    for (int i = 1; i < inst.sink(); ++i)
        mk = std::max(mk, s.starts[i] + durations[i]);
    rep.makespan = mk;
    rep.ok = rep.temporal.empty() && rep.resource.empty();
    return rep;
}

std::vector<std::vector<int>> precedence_adjacency(const Instance& inst) {
    std::vector<std::vector<int>> adj(inst.node_count());
    for (const TemporalConstraint& c : inst.constraints)
        if (c.kind == LagKind::Min && c.lag >= 0.0)
            adj[c.from].push_back(c.to);
    return adj;
}

Reachability::Reachability(int n, const std::vector<std::vector<int>>& adj) : n_(n) {
    bits_.assign(static_cast<size_t>(n) * n, 0);
    // reverse topological DFS would do; n is small, so propagate iteratively
    std::vector<int> order;
    std::vector<int> indeg(n, 0);
    for (int u = 0; u < n; ++u)
        for (int v : adj[u]) ++indeg[v];
    std::vector<int> stack;
    for (int u = 0; u < n; ++u)
        if (indeg[u] == 0) stack.push_back(u);
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (int v : adj[u])
            if (--indeg[v] == 0) stack.push_back(v);
    }
    // cyclic graphs leave nodes out of `order`; their rows stay direct-only
    std::vector<char> seen(n, 0);
    for (int u : order) seen[u] = 1;
    for (int u = 0; u < n; ++u)
        if (!seen[u]) order.push_back(u);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        int u = *it;
        char* row = &bits_[static_cast<size_t>(u) * n_];
        for (int v : adj[u]) {
            row[v] = 1;
            const char* vrow = &bits_[static_cast<size_t>(v) * n_];
            for (int w = 0; w < n_; ++w) row[w] |= vrow[w];
        }
    }
}

Reachability precedence_closure(const Instance& inst) {
    return Reachability(inst.node_count(), precedence_adjacency(inst));
}

std::vector<int> topological_order(int n, const std::vector<std::vector<int>>& adj) {
    std::vector<int> indeg(n, 0), order, stack;
    for (int u = 0; u < n; ++u)
        for (int v : adj[u]) ++indeg[v];
    for (int u = n - 1; u >= 0; --u)
        if (indeg[u] == 0) stack.push_back(u);
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        order.push_back(u);
        for (int v : adj[u])
            if (--indeg[v] == 0) stack.push_back(v);
    }
    if (static_cast<int>(order.size()) != n) return {};
    return order;
}

} // namespace robsched
