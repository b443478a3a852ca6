#include "robsched/rules.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace robsched {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kMeanTol = 1e-12;
} // namespace

SegregatedMoments normal_segregated_moments(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
    SegregatedMoments m;
    m.mu_p = m.mu_m = sigma / std::sqrt(2.0 * kPi);
    m.var_p = m.var_m = (kPi - 1.0) * sigma * sigma / (2.0 * kPi);
    return m;
}

SegregatedMoments uniform_segregated_moments(double a) {
    if (a < 0.0) throw std::invalid_argument("half-width must be nonnegative");
    SegregatedMoments m;
    m.mu_p = m.mu_m = a / 4.0;
    m.var_p = m.var_m = 5.0 * a * a / 48.0;
    return m;
}

SlaForm sla_sum(const SlaForm& a, const SlaForm& b) {
    SlaForm r = a;
    r.c0 += b.c0;
    for (const auto& [k, v] : b.cplus) r.cplus[k] += v;
    for (const auto& [k, v] : b.cminus) r.cminus[k] += v;
    return r;
}

SlaForm sla_max(const SlaForm& a, const SlaForm& b) {
    SlaForm r = a;
    r.c0 = std::max(a.c0, b.c0);
    for (const auto& [k, v] : b.cplus) {
        auto it = r.cplus.find(k);
        if (it == r.cplus.end())
            r.cplus.emplace(k, v);
        else
            it->second = std::max(it->second, v);
    }
    for (const auto& [k, v] : b.cminus) {
        auto it = r.cminus.find(k);
        if (it == r.cminus.end())
            r.cminus.emplace(k, v);
        else
            it->second = std::max(it->second, v);
    }
    return r;
}

SlaForm sla_drop_negative(const SlaForm& f) {
    SlaForm r = f;
    r.cminus.clear();
    return r;
}

MomentPair sla_form_moments(const SlaForm& f,
                            const std::function<SegregatedMoments(int)>& moments,
                            int* clamp_count) {
    MomentPair p;
    p.mean = f.c0;
    auto cp = f.cplus.begin();
    auto cm = f.cminus.begin();
    auto handle = [&](int k, double plus, double minus) {
        SegregatedMoments m = moments(k);
        p.mean += plus * m.mu_p + minus * m.mu_m;
        p.var += plus * plus * m.var_p + minus * minus * m.var_m -
                 2.0 * plus * minus * m.mu_p * m.mu_m;
    };
    while (cp != f.cplus.end() || cm != f.cminus.end()) {
        if (cm == f.cminus.end() || (cp != f.cplus.end() && cp->first < cm->first)) {
            handle(cp->first, cp->second, 0.0);
            ++cp;
        } else if (cp == f.cplus.end() || cm->first < cp->first) {
            handle(cm->first, 0.0, cm->second);
            ++cm;
        } else {
            handle(cp->first, cp->second, cm->second);
            ++cp;
            ++cm;
        }
    }
    if (p.var < 0.0) {
        p.var = 0.0;
        if (clamp_count) ++*clamp_count;
    }
    return p;
}

MomentPair gnla_max_pair(MomentPair a, MomentPair b) {
    if (a.mean < -kMeanTol || b.mean < -kMeanTol)
        throw std::invalid_argument("gnla_max_pair requires nonnegative means");
    MomentPair r;
    double cross = a.var + b.var + a.mean * a.mean + b.mean * b.mean;
    r.mean = 0.5 * (a.mean + b.mean) + 0.5 * std::sqrt(cross);
    r.var = a.var + b.var + 0.5 * a.mean * a.mean + 0.5 * b.mean * b.mean;
    return r;
}

MomentPair gnla_max_pair_normal(double sigma_a, double sigma_b) {
    MomentPair r;
    double s2 = sigma_a * sigma_a + sigma_b * sigma_b;
    r.mean = 0.5 * std::sqrt(s2);
    r.var = (1.0 - 1.0 / kPi) * s2 - (2.0 / kPi) * sigma_a * sigma_b;
    return r;
}

std::vector<std::vector<int>> group_pairs(const std::vector<double>& variances) {
    std::vector<int> idx(variances.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return variances[a] > variances[b]; });
    std::vector<std::vector<int>> groups;
    size_t i = 0;
    for (; i + 1 < idx.size(); i += 2) groups.push_back({idx[i], idx[i + 1]});
    if (i < idx.size()) groups.push_back({idx[i]});
    return groups;
}

namespace {

GnlaOperand combine(const GnlaOperand& a, const GnlaOperand& b) {
    GnlaOperand r;
    r.pair = gnla_max_pair(a.pair, b.pair);
    if (a.normal_leaf && b.normal_leaf &&
        std::abs(a.pair.mean) <= kMeanTol && std::abs(b.pair.mean) <= kMeanTol)
        r.pair.var = gnla_max_pair_normal(a.sigma, b.sigma).var;
    return r;
}

MomentPair reduce(std::vector<GnlaOperand> ops, const std::vector<std::vector<int>>* plan) {
    if (ops.empty()) return {};
    bool first = true;
    while (ops.size() > 1) {
        std::vector<std::vector<int>> groups;
        if (first && plan) {
            groups = *plan;
        } else {
            std::vector<double> vars(ops.size());
            for (size_t i = 0; i < ops.size(); ++i) vars[i] = ops[i].pair.var;
            groups = group_pairs(vars);
        }
        first = false;
        std::vector<GnlaOperand> next;
        next.reserve(groups.size());
        for (const auto& g : groups) {
            if (g.size() == 1)
                next.push_back(ops[g[0]]);
            else
                next.push_back(combine(ops[g[0]], ops[g[1]]));
        }
        ops = std::move(next);
    }
    return ops[0].pair;
}

} // namespace

MomentPair gnla_max_multi(const std::vector<GnlaOperand>& ops) { return reduce(ops, nullptr); }

MomentPair gnla_max_multi_planned(const std::vector<GnlaOperand>& ops,
                                  const std::vector<std::vector<int>>& plan) {
    return reduce(ops, &plan);
}

double chebyshev_factor(double epsilon) {
    if (!(epsilon > 0.0) || epsilon > 1.0)
        throw std::invalid_argument("epsilon must lie in (0, 1]");
    return std::sqrt((1.0 - epsilon) / epsilon);
}

double robust_fitness(MomentPair p, double epsilon) {
    return p.mean + chebyshev_factor(epsilon) * std::sqrt(std::max(p.var, 0.0));
}

namespace {

struct EvalDag {
    std::vector<int> order;
    std::vector<std::vector<const PosEdge*>> incoming;
};

EvalDag eval_dag(const Pos& pos) {
    EvalDag d;
    d.incoming.resize(pos.node_count);
    std::vector<std::vector<int>> adj(pos.node_count);
    for (const PosEdge& e : pos.edges) {
        if (!evaluation_edge(e)) continue;
        // a lag<=0 precedence edge is dominated by a duration-bearing twin
        adj[e.from].push_back(e.to);
        d.incoming[e.to].push_back(&e);
    }
    d.order = topological_order(pos.node_count, adj);
    if (d.order.empty() && pos.node_count > 0)
        throw std::logic_error("POS evaluation graph has a cycle");
    return d;
}

bool dominated_parallel_edge(const std::vector<const PosEdge*>& in, const PosEdge& e) {
    if (e.duration_bearing || e.kind == PosEdge::Kind::Chain || e.lag > 0.0) return false;
    for (const PosEdge* o : in)
        if (o != &e && o->from == e.from &&
            (o->duration_bearing || o->kind == PosEdge::Kind::Chain) && o->lag >= e.lag)
            return true;
    return false;
}

} // namespace

MomentPair gnla_eval(const Pos& pos, const Instance& inst) {
    EvalDag d = eval_dag(pos);
    std::vector<MomentPair> node(pos.node_count);
    for (int v : d.order) {
        std::vector<GnlaOperand> contribs;
        for (const PosEdge* e : d.incoming[v]) {
            if (dominated_parallel_edge(d.incoming[v], *e)) continue;
            const MomentPair& g = node[e->from];
            GnlaOperand c;
            if (e->duration_bearing) {
                const Activity& a = inst.activities[e->from];
                c.pair = {g.mean + e->lag + a.mean_duration, g.var + a.sigma * a.sigma};
                c.normal_leaf = g.var == 0.0;
                c.sigma = a.sigma;
            } else {
                c.pair = {g.mean + e->lag, g.var};
                c.normal_leaf = g.var == 0.0;
                c.sigma = 0.0;
            }
            contribs.push_back(c);
        }
        if (contribs.empty()) {
            node[v] = {0.0, 0.0};
        } else if (contribs.size() == 1) {
            node[v] = contribs[0].pair;
        } else {
            // split each contribution into its mean and a centered remainder
            double det = 0.0;
            for (auto& c : contribs) det = std::max(det, c.pair.mean);
            std::vector<GnlaOperand> centered = contribs;
            for (auto& c : centered) c.pair.mean = 0.0;
            MomentPair mm = gnla_max_multi(centered);
            node[v] = {det + mm.mean, mm.var};
        }
    }
    return node[pos.node_count - 1];
}

SlaForm sla_eval(const Pos& pos, const Instance& inst) {
    EvalDag d = eval_dag(pos);
    std::vector<SlaForm> node(pos.node_count);
    for (int v : d.order) {
        std::vector<SlaForm> contribs;
        for (const PosEdge* e : d.incoming[v]) {
            if (dominated_parallel_edge(d.incoming[v], *e)) continue;
            SlaForm f = node[e->from];
            if (e->duration_bearing) {
                const Activity& a = inst.activities[e->from];
                f.c0 += e->lag + a.mean_duration;
                f.cplus[e->from] += 1.0;
                f.cminus[e->from] += 1.0;
            } else {
                f.c0 += e->lag;
            }
            contribs.push_back(std::move(f));
        }
        if (contribs.empty()) {
            node[v] = SlaForm{};
        } else if (contribs.size() == 1) {
            node[v] = std::move(contribs[0]);
        } else {
            SlaForm acc = sla_drop_negative(contribs[0]);
            for (size_t i = 1; i < contribs.size(); ++i)
                acc = sla_max(acc, sla_drop_negative(contribs[i]));
            node[v] = std::move(acc);
        }
    }
    return node[pos.node_count - 1];
}

MomentPair sla_eval_moments(const Pos& pos, const Instance& inst, int* clamp_count) {
    SlaForm f = sla_eval(pos, inst);
    return sla_form_moments(
        f, [&](int k) { return normal_segregated_moments(inst.activities[k].sigma); },
        clamp_count);
}

double pos_fitness(const Pos& pos, const Instance& inst, Rule rule, double epsilon) {
    MomentPair p = rule == Rule::Gnla ? gnla_eval(pos, inst) : sla_eval_moments(pos, inst);
    return robust_fitness(p, epsilon);
}

} // namespace robsched
