#include "robsched/temporal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace robsched {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-9;
} // namespace

DistanceGraph::DistanceGraph(int n, double horizon) : n_(n), horizon_(horizon) {
    w_.assign(static_cast<size_t>(n) * n, kInf);
    nxt_.assign(static_cast<size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i) {
        at(i, i) = 0.0;
        nxt_[static_cast<size_t>(i) * n_ + i] = i;
        if (i != 0) {
            add_edge(0, i, horizon); // st(i) <= horizon
            add_edge(i, 0, 0.0);     // st(i) >= 0
        }
    }
}

void DistanceGraph::add_edge(int i, int j, double v) {
    if (v < at(i, j)) {
        at(i, j) = v;
        nxt_[static_cast<size_t>(i) * n_ + j] = j;
    }
}

bool DistanceGraph::close() {
    for (int k = 0; k < n_; ++k)
        for (int i = 0; i < n_; ++i) {
            double wik = at(i, k);
            if (wik == kInf) continue;
            for (int j = 0; j < n_; ++j) {
                double via = wik + at(k, j);
                if (via < at(i, j)) {
                    at(i, j) = via;
                    nxt_[static_cast<size_t>(i) * n_ + j] = nxt_[static_cast<size_t>(i) * n_ + k];
                }
            }
        }
    for (int i = 0; i < n_; ++i)
        if (at(i, i) < -kEps) return false;
    return true;
}

bool DistanceGraph::fix_start(int a, double t) {
    add_edge(0, a, t);
    add_edge(a, 0, -t);
    double tn = at(0, a);
    double sn = at(a, 0);

    std::vector<double> col0(n_), row0(n_), cola(n_), rowa(n_);
    for (int i = 0; i < n_; ++i) {
        col0[i] = at(i, 0);
        row0[i] = at(0, i);
        cola[i] = at(i, a);
        rowa[i] = at(a, i);
    }
    // closure was valid before, so any improved path crosses one new edge
    for (int i = 0; i < n_; ++i) {
        double* row = &w_[static_cast<size_t>(i) * n_];
        double base0 = col0[i];
        double basea = cola[i];
        for (int j = 0; j < n_; ++j) {
            if (base0 != kInf) {
                double via = base0 + tn + rowa[j];
                if (via < row[j]) row[j] = via;
            }
            if (basea != kInf) {
                double via = basea + sn + row0[j];
                if (via < row[j]) row[j] = via;
            }
        }
    }
    for (int i = 0; i < n_; ++i)
        if (at(i, i) < -kEps) return false;
    return true;
}

std::vector<int> DistanceGraph::negative_cycle() const {
    for (int v = 0; v < n_; ++v) {
        if (weight(v, v) >= -kEps) continue;
        std::vector<int> cycle{v};
        int u = nxt_[static_cast<size_t>(v) * n_ + v];
        int guard = 0;
        while (u != v && u >= 0 && guard++ <= n_) {
            cycle.push_back(u);
            u = nxt_[static_cast<size_t>(u) * n_ + v];
        }
        cycle.push_back(v);
        return cycle;
    }
    return {};
}

double default_horizon(const Instance& inst) {
    double h = 1.0;
    for (const Activity& a : inst.activities) h += std::ceil(a.mean_duration);
    for (const TemporalConstraint& c : inst.constraints)
        if (c.kind == LagKind::Min && c.lag > 0.0) h += std::ceil(c.lag);
    return h;
}

std::variant<DistanceGraph, TemporalInfeasible>
build_and_close(const Instance& inst, double horizon) {
    DistanceGraph g(inst.node_count(), horizon);
    for (const TemporalConstraint& c : inst.constraints) {
        if (c.kind == LagKind::Min) {
            double eff = c.lag + (c.duration_bearing ? inst.activities[c.from].mean_duration : 0.0);
            g.add_edge(c.to, c.from, -eff);
        } else {
            g.add_edge(c.from, c.to, c.lag);
        }
    }
    if (!g.close()) {
        TemporalInfeasible inf;
        inf.cycle = g.negative_cycle();
        std::ostringstream os;
        os << "temporal constraints are inconsistent; negative cycle:";
        for (int v : inf.cycle) os << ' ' << v;
        inf.message = os.str();
        return inf;
    }
    return g;
}

std::vector<Window> windows(const DistanceGraph& g) {
    std::vector<Window> ws(g.size());
    for (int i = 0; i < g.size(); ++i) ws[i] = {g.est(i), g.lst(i)};
    return ws;
}

std::variant<DistanceGraph, TemporalInfeasible>
fix_start(const DistanceGraph& g, int a, double t) {
    DistanceGraph copy = g;
    if (!copy.fix_start(a, t)) {
        TemporalInfeasible inf;
        std::ostringstream os;
        os << "fixing activity " << a << " at " << t << " is inconsistent";
        inf.message = os.str();
        return inf;
    }
    return copy;
}

bool reclose_full(DistanceGraph& g) { return g.close(); }

} // namespace robsched
