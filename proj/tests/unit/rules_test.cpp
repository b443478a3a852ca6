#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "robsched/rng.hpp"
#include "robsched/rules.hpp"

using namespace robsched;

namespace {

constexpr double kMu1 = 0.3989422804014327;   // E[z+] for sigma 1: 1/sqrt(2 pi)
constexpr double kVarP1 = 0.3408450569081047; // Var[z+] for sigma 1: (pi-1)/(2 pi)

Instance two_parallel_instance(double sigma) {
    Instance inst;
    inst.capacities = {2};
    inst.activities.resize(4);
    for (int i = 0; i < 4; ++i) {
        inst.activities[static_cast<std::size_t>(i)].id = i;
        inst.activities[static_cast<std::size_t>(i)].demands = {0};
    }
    inst.activities[1].mean_duration = 3.0;
    inst.activities[1].sigma = sigma;
    inst.activities[1].demands = {1};
    inst.activities[2].mean_duration = 2.0;
    inst.activities[2].sigma = sigma;
    inst.activities[2].demands = {1};
    return inst;
}

Pos parallel_pos() {
    Pos pos;
    pos.node_count = 4;
    pos.edges.push_back({0, 1, PosEdge::Kind::Precedence, 0.0, false});
    pos.edges.push_back({0, 2, PosEdge::Kind::Precedence, 0.0, false});
    pos.edges.push_back({1, 3, PosEdge::Kind::Precedence, 0.0, true});
    pos.edges.push_back({2, 3, PosEdge::Kind::Precedence, 0.0, true});
    pos.chains = {{{1}, {2}}};
    return pos;
}

Pos serial_pos() {
    Pos pos;
    pos.node_count = 4;
    pos.edges.push_back({0, 1, PosEdge::Kind::Precedence, 0.0, false});
    pos.edges.push_back({1, 2, PosEdge::Kind::Chain, 0.0, true});
    pos.edges.push_back({2, 3, PosEdge::Kind::Precedence, 0.0, true});
    pos.chains = {{{1, 2}}};
    return pos;
}

// max over all perfect matchings of sum of sigma products (odd element unpaired)
double best_matching_objective(const std::vector<double>& vars) {
    std::vector<int> items(vars.size());
    std::iota(items.begin(), items.end(), 0);
    std::function<double(std::vector<int>&)> rec = [&](std::vector<int>& rest) -> double {
        if (rest.size() < 2) return 0.0;
        int a = rest.front();
        double best = 0.0;
        for (std::size_t j = 1; j < rest.size(); ++j) {
            int b = rest[j];
            std::vector<int> next;
            for (std::size_t k = 1; k < rest.size(); ++k)
                if (k != j) next.push_back(rest[k]);
            double v = std::sqrt(vars[static_cast<std::size_t>(a)] *
                                 vars[static_cast<std::size_t>(b)]) +
                       rec(next);
            best = std::max(best, v);
            // odd sizes may leave `a` unpaired instead
        }
        if (rest.size() % 2 == 1) {
            std::vector<int> next(rest.begin() + 1, rest.end());
            best = std::max(best, rec(next));
        }
        return best;
    };
    return rec(items);
}

double matching_objective(const std::vector<std::vector<int>>& groups,
                          const std::vector<double>& vars) {
    double v = 0.0;
    for (const auto& g : groups)
        if (g.size() == 2)
            v += std::sqrt(vars[static_cast<std::size_t>(g[0])] *
                           vars[static_cast<std::size_t>(g[1])]);
    return v;
}

} // namespace

TEST_CASE("normal segregated moments match the closed form") {
    auto m = normal_segregated_moments(1.0);
    CHECK(m.mu_p == doctest::Approx(kMu1).epsilon(1e-9));
    CHECK(m.mu_m == doctest::Approx(kMu1).epsilon(1e-9));
    CHECK(m.var_p == doctest::Approx(kVarP1).epsilon(1e-9));
    CHECK(m.var_m == doctest::Approx(kVarP1).epsilon(1e-9));

    auto m2 = normal_segregated_moments(2.0);
    CHECK(m2.mu_p == doctest::Approx(2.0 * kMu1).epsilon(1e-9));
    CHECK(m2.var_p == doctest::Approx(4.0 * kVarP1).epsilon(1e-9));

    auto z = normal_segregated_moments(0.0);
    CHECK(z.mu_p == 0.0);
    CHECK(z.var_p == 0.0);
    CHECK_THROWS_AS(normal_segregated_moments(-1.0), std::invalid_argument);
}

TEST_CASE("normal segregated moments agree with simulation") {
    Rng rng(314);
    const int n = 400000;
    double sp = 0.0, spp = 0.0, sm = 0.0, smm = 0.0;
    for (int i = 0; i < n; ++i) {
        double z = rng.normal(0.0, 1.0);
        double zp = std::max(z, 0.0), zm = std::max(-z, 0.0);
        sp += zp;
        spp += zp * zp;
        sm += zm;
        smm += zm * zm;
    }
    double mu_p = sp / n, mu_m = sm / n;
    CHECK(mu_p == doctest::Approx(kMu1).epsilon(0.01));
    CHECK(mu_m == doctest::Approx(kMu1).epsilon(0.01));
    CHECK(spp / n - mu_p * mu_p == doctest::Approx(kVarP1).epsilon(0.02));
    CHECK(smm / n - mu_m * mu_m == doctest::Approx(kVarP1).epsilon(0.02));
}

TEST_CASE("uniform segregated moments match the closed form") {
    auto m = uniform_segregated_moments(2.0);
    CHECK(m.mu_p == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(m.var_p == doctest::Approx(5.0 / 12.0).epsilon(1e-12));
    CHECK_THROWS_AS(uniform_segregated_moments(-0.1), std::invalid_argument);
}

TEST_CASE("form sum adds constants and coefficients") {
    SlaForm a{3.0, {{1, 1.0}}, {{1, 1.0}}};
    SlaForm b{2.0, {{2, 1.0}}, {{1, 0.5}}};
    SlaForm s = sla_sum(a, b);
    CHECK(s.c0 == doctest::Approx(5.0));
    CHECK(s.cplus.at(1) == doctest::Approx(1.0));
    CHECK(s.cplus.at(2) == doctest::Approx(1.0));
    CHECK(s.cminus.at(1) == doctest::Approx(1.5));
}

TEST_CASE("form max takes componentwise maxima") {
    SlaForm a{1.0, {{1, 2.0}}, {{3, 1.0}}};
    SlaForm b{4.0, {{1, 1.0}, {2, 5.0}}, {}};
    SlaForm m = sla_max(a, b);
    CHECK(m.c0 == doctest::Approx(4.0));
    CHECK(m.cplus.at(1) == doctest::Approx(2.0));
    CHECK(m.cplus.at(2) == doctest::Approx(5.0));
    CHECK(m.cminus.at(3) == doctest::Approx(1.0));
    CHECK(sla_max(a, a) == a);
}

TEST_CASE("dropping negative parts clears cminus only") {
    SlaForm a{1.0, {{1, 2.0}}, {{1, 1.0}, {2, 3.0}}};
    SlaForm d = sla_drop_negative(a);
    CHECK(d.c0 == a.c0);
    CHECK(d.cplus == a.cplus);
    CHECK(d.cminus.empty());
}

TEST_CASE("form max upper-bounds both inputs at every realization") {
    Rng rng(2718);
    for (int t = 0; t < 50; ++t) {
        SlaForm a, b;
        a.c0 = rng.uniform01() * 5.0;
        b.c0 = rng.uniform01() * 5.0;
        for (int k = 1; k <= 4; ++k) {
            if (rng.uniform01() < 0.7) a.cplus[k] = rng.uniform01() * 2.0;
            if (rng.uniform01() < 0.7) a.cminus[k] = rng.uniform01() * 2.0;
            if (rng.uniform01() < 0.7) b.cplus[k] = rng.uniform01() * 2.0;
            if (rng.uniform01() < 0.7) b.cminus[k] = rng.uniform01() * 2.0;
        }
        SlaForm m = sla_max(a, b);
        for (int s = 0; s < 200; ++s) {
            auto value = [&](const SlaForm& f, const std::vector<double>& z) {
                double v = f.c0;
                for (const auto& [k, c] : f.cplus) v += c * std::max(z[static_cast<std::size_t>(k)], 0.0);
                for (const auto& [k, c] : f.cminus) v += c * std::max(-z[static_cast<std::size_t>(k)], 0.0);
                return v;
            };
            std::vector<double> z(5);
            for (auto& x : z) x = rng.normal(0.0, 1.0);
            double vm = value(m, z);
            CHECK(vm >= value(a, z) - 1e-12);
            CHECK(vm >= value(b, z) - 1e-12);
        }
    }
}

TEST_CASE("form moments match the closed form") {
    auto normal1 = [](int) { return normal_segregated_moments(1.0); };

    SlaForm parallel{3.0, {{1, 1.0}, {2, 1.0}}, {}};
    auto p = sla_form_moments(parallel, normal1);
    CHECK(p.mean == doctest::Approx(3.0 + 2.0 * kMu1).epsilon(1e-12));
    CHECK(p.var == doctest::Approx(2.0 * kVarP1).epsilon(1e-12));

    // c+ = c- = 1 on one activity: variance of |z|, i.e. 1 - 2/pi
    SlaForm both{0.0, {{1, 1.0}}, {{1, 1.0}}};
    int clamps = 0;
    auto q = sla_form_moments(both, normal1, &clamps);
    CHECK(q.mean == doctest::Approx(2.0 * kMu1).epsilon(1e-12));
    CHECK(q.var == doctest::Approx(2.0 * kVarP1 - 2.0 * kMu1 * kMu1).epsilon(1e-12));
    CHECK(q.var == doctest::Approx(1.0 - 2.0 / 3.14159265358979323846).epsilon(1e-9));
    CHECK(clamps == 0);
}

TEST_CASE("form moments of c+=c-=1 match the simulated absolute value") {
    SlaForm both{0.0, {{1, 1.0}}, {{1, 1.0}}};
    auto q = sla_form_moments(both, [](int) { return normal_segregated_moments(1.0); });
    Rng rng(99);
    const int n = 400000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = std::abs(rng.normal(0.0, 1.0));
        s += v;
        ss += v * v;
    }
    double mean = s / n;
    CHECK(q.mean == doctest::Approx(mean).epsilon(0.01));
    CHECK(q.var == doctest::Approx(ss / n - mean * mean).epsilon(0.02));
}

TEST_CASE("negative variance totals are clamped and counted") {
    // artificial moments with a huge cross term
    auto weird = [](int) { return SegregatedMoments{1.0, 1.0, 0.1, 0.1}; };
    SlaForm f{0.0, {{1, 1.0}}, {{1, 1.0}}};
    int clamps = 0;
    auto p = sla_form_moments(f, weird, &clamps);
    CHECK(p.var == 0.0);
    CHECK(clamps == 1);
    CHECK(p.mean == doctest::Approx(2.0));
}

TEST_CASE("pair bound matches the closed form") {
    MomentPair r = gnla_max_pair({0.0, 1.0}, {0.0, 1.0});
    CHECK(r.mean == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(r.var == doctest::Approx(2.0).epsilon(1e-12));

    MomentPair s = gnla_max_pair({1.0, 1.0}, {0.0, 1.0});
    CHECK(s.mean == doctest::Approx(1.3660254037844386).epsilon(1e-12));
    CHECK(s.var == doctest::Approx(2.5).epsilon(1e-12));

    MomentPair z = gnla_max_pair({0.0, 0.0}, {0.0, 0.0});
    CHECK(z.mean == 0.0);
    CHECK(z.var == 0.0);

    CHECK_THROWS_AS(gnla_max_pair({-1.0, 1.0}, {0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("normal-leaf pair bound is tighter than the generic one") {
    MomentPair n = gnla_max_pair_normal(1.0, 1.0);
    CHECK(n.mean == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(n.var == doctest::Approx(2.0 - 4.0 / 3.14159265358979323846).epsilon(1e-12));
    CHECK(n.var == doctest::Approx(0.7267604552648372).epsilon(1e-12));
    CHECK(n.var < gnla_max_pair({0.0, 1.0}, {0.0, 1.0}).var);

    // scaling: both inputs scaled by beta scales the variance by beta^2
    MomentPair h = gnla_max_pair_normal(0.5, 0.5);
    CHECK(h.var == doctest::Approx(0.25 * n.var).epsilon(1e-12));

    // the leaf variance is not monotone in one sigma alone
    CHECK(gnla_max_pair_normal(0.0, 1.0).var == doctest::Approx(0.6816901138162094).epsilon(1e-9));
    CHECK(gnla_max_pair_normal(0.5, 1.0).var == doctest::Approx(0.5338027560864711).epsilon(1e-9));
}

TEST_CASE("pair bound dominates sampled maxima of independent normals") {
    Rng rng(555);
    const int n = 200000;
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = std::max(rng.normal(0.0, 1.0), rng.normal(0.0, 1.0));
        s += v;
        ss += v * v;
    }
    double mean = s / n;
    double var = ss / n - mean * mean;
    // true mean of the max of two iid standard normals is 1/sqrt(pi)
    CHECK(mean == doctest::Approx(0.5641895835477563).epsilon(0.01));
    MomentPair leaf = gnla_max_pair_normal(1.0, 1.0);
    CHECK(leaf.mean >= mean);
    CHECK(leaf.var >= var - 0.01);
}

TEST_CASE("grouping pairs adjacent variances after sorting") {
    auto g1 = group_pairs({4.0, 3.0, 2.0, 1.0});
    REQUIRE(g1.size() == 2);
    CHECK(g1[0] == std::vector<int>{0, 1});
    CHECK(g1[1] == std::vector<int>{2, 3});

    auto g2 = group_pairs({1.0, 5.0, 3.0});
    REQUIRE(g2.size() == 2);
    CHECK(g2[0] == std::vector<int>{1, 2});
    CHECK(g2[1] == std::vector<int>{0});

    auto g3 = group_pairs({2.0, 2.0, 2.0, 2.0});
    REQUIRE(g3.size() == 2);
    CHECK(g3[0] == std::vector<int>{0, 1}); // stable under ties

    CHECK(group_pairs({7.0}) == std::vector<std::vector<int>>{{0}});
    CHECK(group_pairs({}).empty());
}

TEST_CASE("grouping maximizes the sigma-product objective") {
    Rng rng(808);
    for (int t = 0; t < 20; ++t) {
        int k = static_cast<int>(rng.uniform_int(2, 6));
        std::vector<double> vars(static_cast<std::size_t>(k));
        for (auto& v : vars) v = 0.1 + 4.0 * rng.uniform01();
        double got = matching_objective(group_pairs(vars), vars);
        double best = best_matching_objective(vars);
        CHECK(got == doctest::Approx(best).epsilon(1e-9));
    }
}

TEST_CASE("tournament reduction handles the easy shapes") {
    CHECK(gnla_max_multi({}).mean == 0.0);

    GnlaOperand a{{3.0, 1.0}, false, 0.0};
    CHECK(gnla_max_multi({a}).mean == doctest::Approx(3.0));
    CHECK(gnla_max_multi({a}).var == doctest::Approx(1.0));

    GnlaOperand b{{0.0, 1.0}, true, 1.0};
    MomentPair two = gnla_max_multi({b, b});
    CHECK(two.mean == doctest::Approx(0.7071067811865476).epsilon(1e-12));
    CHECK(two.var == doctest::Approx(0.7267604552648372).epsilon(1e-12));

    // four centered normal leaves collapse pairwise, then once more
    MomentPair four = gnla_max_multi({b, b, b, b});
    MomentPair level2 = gnla_max_pair(two, two);
    CHECK(four.mean == doctest::Approx(level2.mean).epsilon(1e-12));
    CHECK(four.var == doctest::Approx(level2.var).epsilon(1e-12));
}

TEST_CASE("planned grouping overrides only the first level") {
    GnlaOperand hi{{0.0, 4.0}, true, 2.0};
    GnlaOperand lo{{0.0, 1.0}, true, 1.0};
    std::vector<GnlaOperand> ops{hi, lo, hi, lo};
    MomentPair matched = gnla_max_multi(ops); // pairs (hi,hi) and (lo,lo)
    MomentPair crossed = gnla_max_multi_planned(ops, {{0, 1}, {2, 3}});
    CHECK(matched.mean != doctest::Approx(crossed.mean).epsilon(1e-12));
    // adjacent-by-variance pairing never loses to the crossed plan here
    CHECK(robust_fitness(matched, 0.1) <= robust_fitness(crossed, 0.1) + 1e-9);
}

TEST_CASE("chebyshev factor hits its anchors and validates epsilon") {
    CHECK(chebyshev_factor(0.1) == 3.0);
    CHECK(chebyshev_factor(0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(chebyshev_factor(1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(chebyshev_factor(0.0), std::invalid_argument);
    CHECK_THROWS_AS(chebyshev_factor(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(chebyshev_factor(1.5), std::invalid_argument);
}

TEST_CASE("robust fitness combines mean and deviation") {
    CHECK(robust_fitness({10.0, 4.0}, 0.1) == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(robust_fitness({5.0, 2.0}, 0.5) == doctest::Approx(5.0 + std::sqrt(2.0)).epsilon(1e-12));
    CHECK(robust_fitness({5.0, 2.0}, 1.0) == doctest::Approx(5.0));
    CHECK(robust_fitness({5.0, -1.0}, 0.1) == doctest::Approx(5.0)); // clamped
    // strictly decreasing in epsilon while variance is positive
    CHECK(robust_fitness({5.0, 2.0}, 0.05) > robust_fitness({5.0, 2.0}, 0.1));
}

TEST_CASE("serial evaluation adds means and variances") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos = serial_pos();
    MomentPair g = gnla_eval(pos, inst);
    CHECK(g.mean == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(g.var == doctest::Approx(2.0).epsilon(1e-12));

    SlaForm f = sla_eval(pos, inst);
    CHECK(f.c0 == doctest::Approx(5.0));
    CHECK(f.cplus.at(1) == doctest::Approx(1.0));
    CHECK(f.cplus.at(2) == doctest::Approx(1.0));
    CHECK(f.cminus.at(1) == doctest::Approx(1.0));
    CHECK(f.cminus.at(2) == doctest::Approx(1.0));
    MomentPair s = sla_eval_moments(pos, inst);
    CHECK(s.mean == doctest::Approx(5.0 + 4.0 * kMu1).epsilon(1e-12));
    CHECK(s.var == doctest::Approx(2.0 * (2.0 * kVarP1 - 2.0 * kMu1 * kMu1)).epsilon(1e-12));
}

TEST_CASE("parallel evaluation hits the frozen anchors") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos = parallel_pos();

    MomentPair g = gnla_eval(pos, inst);
    CHECK(g.mean == doctest::Approx(3.7071067811865476).epsilon(1e-12));
    CHECK(g.var == doctest::Approx(0.7267604552648372).epsilon(1e-12));

    SlaForm f = sla_eval(pos, inst);
    CHECK(f.c0 == doctest::Approx(3.0));
    CHECK(f.cplus.at(1) == doctest::Approx(1.0));
    CHECK(f.cplus.at(2) == doctest::Approx(1.0));
    CHECK(f.cminus.empty()); // the merge keeps only positive parts
    MomentPair s = sla_eval_moments(pos, inst);
    CHECK(s.mean == doctest::Approx(3.0 + 2.0 * kMu1).epsilon(1e-12));
    CHECK(s.var == doctest::Approx(2.0 * kVarP1).epsilon(1e-12));
}

TEST_CASE("rule crossover between the tails") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos = parallel_pos();
    // moderate epsilon favors the pairwise bound, tiny epsilon the linear rule
    CHECK(pos_fitness(pos, inst, Rule::Gnla, 0.2) < pos_fitness(pos, inst, Rule::Sla, 0.2) - 1e-4);
    CHECK(pos_fitness(pos, inst, Rule::Sla, 0.01) < pos_fitness(pos, inst, Rule::Gnla, 0.01) - 1e-4);
}

TEST_CASE("zero sigma reduces both rules to the longest path") {
    Instance inst = two_parallel_instance(0.0);
    CHECK(pos_fitness(serial_pos(), inst, Rule::Gnla, 0.1) == doctest::Approx(5.0));
    CHECK(pos_fitness(serial_pos(), inst, Rule::Sla, 0.1) == doctest::Approx(5.0));
    CHECK(pos_fitness(parallel_pos(), inst, Rule::Gnla, 0.1) == doctest::Approx(3.0));
    CHECK(pos_fitness(parallel_pos(), inst, Rule::Sla, 0.1) == doctest::Approx(3.0));
}

TEST_CASE("a redundant zero-lag edge does not change the evaluation") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos = serial_pos();
    Pos noisy = pos;
    noisy.edges.push_back({1, 2, PosEdge::Kind::Precedence, 0.0, false});
    CHECK(gnla_eval(noisy, inst).mean == doctest::Approx(gnla_eval(pos, inst).mean).epsilon(1e-12));
    CHECK(gnla_eval(noisy, inst).var == doctest::Approx(gnla_eval(pos, inst).var).epsilon(1e-12));
    CHECK(sla_eval_moments(noisy, inst).var ==
          doctest::Approx(sla_eval_moments(pos, inst).var).epsilon(1e-12));
}

TEST_CASE("negative-lag precedence edges stay out of the evaluation") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos = parallel_pos();
    Pos noisy = pos;
    noisy.edges.push_back({2, 1, PosEdge::Kind::Precedence, -10.0, false});
    CHECK(gnla_eval(noisy, inst).mean == doctest::Approx(gnla_eval(pos, inst).mean).epsilon(1e-12));
}

TEST_CASE("evaluation rejects cyclic evaluation graphs") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos = parallel_pos();
    pos.edges.push_back({3, 0, PosEdge::Kind::Precedence, 0.0, false});
    CHECK_THROWS_AS(gnla_eval(pos, inst), std::logic_error);
}

TEST_CASE("positive lags shift the evaluated moments") {
    Instance inst = two_parallel_instance(1.0);
    Pos pos;
    pos.node_count = 4;
    pos.edges.push_back({0, 1, PosEdge::Kind::Precedence, 0.0, false});
    pos.edges.push_back({1, 2, PosEdge::Kind::Precedence, 4.0, false}); // start lag, no duration
    pos.edges.push_back({2, 3, PosEdge::Kind::Precedence, 0.0, true});
    MomentPair g = gnla_eval(pos, inst);
    CHECK(g.mean == doctest::Approx(6.0)); // 4 + duration 2
    CHECK(g.var == doctest::Approx(1.0));  // only activity 2 contributes
}
