#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "robsched/io.hpp"
#include "robsched/search.hpp"

#include "../support/generators.hpp"

#ifndef TESTDATA_DIR
#define TESTDATA_DIR "tests/data"
#endif

using namespace robsched;

namespace {

Instance load_fixture(const char* name) {
    Instance inst = parse_native(read_file(std::string(TESTDATA_DIR) + "/" + name));
    REQUIRE(validate_instance(inst).ok);
    return inst;
}

Reachability empty_closure(int n) { return Reachability(n, std::vector<std::vector<int>>(static_cast<std::size_t>(n))); }

bool is_linearization(const ActivityList& al, const Reachability& closure) {
    for (std::size_t i = 0; i < al.size(); ++i)
        for (std::size_t j = i + 1; j < al.size(); ++j)
            if (closure.reaches(al[j], al[i])) return false;
    return true;
}

} // namespace

TEST_CASE("shift ahead moves the failing activity to a random earlier slot") {
    Rng rng(1);
    std::map<int, int> landed;
    const int n = 600;
    for (int t = 0; t < n; ++t) {
        bool changed = false;
        ActivityList out = shift_ahead_move({1, 2, 3, 4}, 4, empty_closure(5), rng, &changed);
        REQUIRE(changed);
        auto p = std::find(out.begin(), out.end(), 4);
        REQUIRE(p != out.end());
        int idx = static_cast<int>(p - out.begin());
        CHECK(idx < 3);
        ++landed[idx];
        // the other activities keep their relative order
        ActivityList rest;
        for (int a : out)
            if (a != 4) rest.push_back(a);
        CHECK(rest == ActivityList{1, 2, 3});
    }
    REQUIRE(landed.size() == 3);
    for (const auto& [idx, c] : landed) CHECK(c > n / 6);
}

TEST_CASE("shift ahead respects closure predecessors") {
    std::vector<std::vector<int>> adj(5);
    adj[2].push_back(4); // 2 must stay before 4
    Reachability closure(5, adj);
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        bool changed = false;
        ActivityList out = shift_ahead_move({1, 2, 3, 4}, 4, closure, rng, &changed);
        REQUIRE(changed);
        auto p2 = std::find(out.begin(), out.end(), 2);
        auto p4 = std::find(out.begin(), out.end(), 4);
        CHECK(p2 < p4); // lands only between 2 and its old slot
    }
}

TEST_CASE("shift ahead leaves immovable activities alone") {
    Rng rng(3);
    bool changed = true;
    ActivityList front = shift_ahead_move({1, 2, 3}, 1, empty_closure(4), rng, &changed);
    CHECK_FALSE(changed);
    CHECK(front == ActivityList{1, 2, 3});

    std::vector<std::vector<int>> adj(4);
    adj[2].push_back(3);
    changed = true;
    ActivityList blocked = shift_ahead_move({1, 2, 3}, 3, Reachability(4, adj), rng, &changed);
    CHECK_FALSE(changed);
    CHECK(blocked == ActivityList{1, 2, 3});

    changed = true;
    ActivityList missing = shift_ahead_move({1, 2, 3}, 9, empty_closure(10), rng, &changed);
    CHECK_FALSE(changed);
}

TEST_CASE("swap move exchanges two order-compatible activities") {
    // the sampler rejects i == j draws, so allow it a few calls
    Rng rng(4);
    int swapped = 0;
    for (int t = 0; t < 20; ++t) {
        bool changed = false;
        ActivityList out = swap_move({1, 2}, empty_closure(3), rng, &changed);
        if (changed) {
            CHECK(out == ActivityList{2, 1});
            ++swapped;
        } else {
            CHECK(out == ActivityList{1, 2});
        }
    }
    CHECK(swapped >= 15);
}

TEST_CASE("swap move gives up on a fully ordered list") {
    std::vector<std::vector<int>> adj(4);
    adj[1].push_back(2);
    adj[2].push_back(3);
    Reachability closure(4, adj);
    Rng rng(5);
    bool changed = true;
    ActivityList out = swap_move({1, 2, 3}, closure, rng, &changed);
    CHECK_FALSE(changed);
    CHECK(out == ActivityList{1, 2, 3});
}

TEST_CASE("swap move preserves linearizations") {
    Rng meta(1111);
    for (int t = 0; t < 30; ++t) {
        Instance inst = testsupport::random_instance(meta, 8, false);
        Reachability closure = precedence_closure(inst);
        Rng rng(derive_stream(2, static_cast<uint64_t>(t)));
        ActivityList al = random_activity_list(inst, rng);
        for (int m = 0; m < 20; ++m) {
            bool changed = false;
            ActivityList next = swap_move(al, closure, rng, &changed);
            REQUIRE(is_linearization(next, closure));
            if (changed) {
                // exactly two positions differ
                int diff = 0;
                for (std::size_t i = 0; i < al.size(); ++i)
                    if (al[i] != next[i]) ++diff;
                CHECK(diff == 2);
            }
            al = next;
        }
    }
}

TEST_CASE("pair selection finds unordered overloading pairs") {
    Instance t1 = load_fixture("t1.json");
    auto pairs = pairs_selection(t1);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::pair<int, int>{1, 2});

    Instance t2 = load_fixture("t2.json");
    CHECK(pairs_selection(t2).empty()); // capacity 2 fits both

    // precedence-related pairs are excluded even when they overload
    Instance chained = load_fixture("t1.json");
    chained.constraints.push_back({1, 2, LagKind::Min, 0.0, true});
    CHECK(pairs_selection(chained).empty());
}

TEST_CASE("ordering generation recovers the dominant order") {
    // a short deterministic activity against a long noisy one feeding a chain:
    // scheduling the long one first is better in nearly every sample
    Instance inst;
    inst.capacities = {1};
    inst.activities.resize(5);
    for (int i = 0; i < 5; ++i) {
        inst.activities[static_cast<std::size_t>(i)].id = i;
        inst.activities[static_cast<std::size_t>(i)].demands = {0};
    }
    inst.activities[1].mean_duration = 1.0; // short, deterministic
    inst.activities[1].demands = {1};
    inst.activities[2].mean_duration = 5.0; // long, noisy, feeds 3
    inst.activities[2].sigma = 1.0;
    inst.activities[2].demands = {1};
    inst.activities[3].mean_duration = 5.0;
    inst.activities[3].sigma = 1.0;
    inst.constraints.push_back({2, 3, LagKind::Min, 0.0, true});
    REQUIRE(validate_instance(inst).ok);

    auto pairs = pairs_selection(inst);
    REQUIRE(pairs.size() == 1);
    REQUIRE(pairs[0] == std::pair<int, int>{1, 2});

    int recovered = 0;
    for (uint64_t seed = 0; seed < 100; ++seed) {
        SearchConfig config;
        config.seed = seed;
        config.og_samples = 100;
        OrderingResult res = generate_ordering(inst, pairs, config);
        REQUIRE(res.decisions.size() == 1);
        const OrderDecision& dec = res.decisions[0];
        // draw-based generation can miss some samples; well past the quorum
        CHECK(dec.samples_used >= 25);
        if (dec.decision == -1 && dec.inserted && res.graph.ordered(2, 1)) ++recovered;
    }
    CHECK(recovered >= 95);
}

TEST_CASE("ordering generation skips pairs without bilateral evidence") {
    Instance inst = load_fixture("t1.json");
    inst.constraints.push_back({1, 2, LagKind::Min, 5.0, false});
    inst.constraints.push_back({1, 2, LagKind::Max, 3.0, false}); // globally infeasible
    SearchConfig config;
    config.og_samples = 40;
    OrderingResult res = generate_ordering(inst, {{1, 2}}, config);
    REQUIRE(res.decisions.size() == 1);
    CHECK(res.decisions[0].samples_used == 0);
    CHECK(res.decisions[0].decision == 0);
    CHECK(res.decisions[0].index_value == doctest::Approx(0.5));
    CHECK_FALSE(res.decisions[0].inserted);
    CHECK(res.graph.edges().empty());
}

TEST_CASE("ordering decisions stay structurally consistent") {
    Rng meta(1212);
    for (int t = 0; t < 6; ++t) {
        Instance inst = testsupport::random_instance(meta, 6, false);
        SearchConfig config;
        config.seed = 100 + static_cast<uint64_t>(t);
        config.og_samples = 30;
        auto pairs = pairs_selection(inst);
        OrderingResult res = generate_ordering(inst, pairs, config);
        CHECK(res.decisions.size() == pairs.size());
        for (const OrderDecision& dec : res.decisions) {
            CHECK(dec.samples_used <= config.og_samples);
            CHECK(dec.index_value >= 0.0);
            CHECK(dec.index_value <= 1.0);
            if (dec.decision == 0) CHECK_FALSE(dec.inserted);
            if (dec.inserted) {
                REQUIRE(dec.decision != 0);
                int u = dec.decision > 0 ? dec.a : dec.b;
                int v = dec.decision > 0 ? dec.b : dec.a;
                CHECK(res.graph.ordered(u, v));
            }
        }
        // inserted decisions never contradict the problem precedence
        Reachability prec = precedence_closure(inst);
        for (const auto& [u, v] : res.graph.edges()) CHECK_FALSE(prec.reaches(v, u));
    }
}

TEST_CASE("search finds the robust parallel order on the two-unit fixture") {
    Instance t2 = load_fixture("t2.json");
    SearchConfig config;
    config.rule = Rule::Gnla;
    config.epsilon = 0.1;
    config.max_iterations = 1000;
    config.seed = 7;
    RobustResult res = robust_local_search(t2, config);
    REQUIRE(res.feasible_found);
    CHECK(res.iterations_used == 1000);
    CHECK(res.robust_makespan == doctest::Approx(6.264614180468813).epsilon(1e-9));
    CHECK(res.rule == Rule::Gnla);
    CHECK(res.epsilon == doctest::Approx(0.1));
    CHECK(res.seed == 7);
    CHECK(res.feasible_fraction > 0.9);

    SearchConfig sla = config;
    sla.rule = Rule::Sla;
    RobustResult sres = robust_local_search(t2, sla);
    REQUIRE(sres.feasible_found);
    CHECK(sres.robust_makespan == doctest::Approx(6.2748203743325346).epsilon(1e-9));
}

TEST_CASE("zero sigma search returns the deterministic optima") {
    Instance t1 = load_fixture("t1.json");
    Instance t2 = load_fixture("t2.json");
    for (int i = 0; i < t1.node_count(); ++i) t1.activities[static_cast<std::size_t>(i)].sigma = 0.0;
    for (int i = 0; i < t2.node_count(); ++i) t2.activities[static_cast<std::size_t>(i)].sigma = 0.0;
    for (Rule rule : {Rule::Gnla, Rule::Sla}) {
        SearchConfig config;
        config.rule = rule;
        config.max_iterations = 300;
        config.seed = 3;
        RobustResult r1 = robust_local_search(t1, config);
        REQUIRE(r1.feasible_found);
        CHECK(r1.robust_makespan == doctest::Approx(5.0));
        RobustResult r2 = robust_local_search(t2, config);
        REQUIRE(r2.feasible_found);
        CHECK(r2.robust_makespan == doctest::Approx(3.0));
    }
}

TEST_CASE("search results are reproducible and self-consistent") {
    Rng meta(1313);
    for (int t = 0; t < 4; ++t) {
        Instance inst = testsupport::random_instance(meta, 7, false, 0.7);
        SearchConfig config;
        config.max_iterations = 120;
        config.seed = 40 + static_cast<uint64_t>(t);
        config.record_trace = true;
        config.chaining = t % 2 == 0 ? Chaining::Basic : Chaining::Flexible;
        RobustResult a = robust_local_search(inst, config);
        RobustResult b = robust_local_search(inst, config);
        CHECK(a.robust_makespan == b.robust_makespan);
        CHECK(a.pos == b.pos);
        CHECK(a.feasible_fraction == b.feasible_fraction);
        REQUIRE(a.trace.size() == b.trace.size());
        if (a.feasible_found) {
            // the reported value is exactly the fitness of the reported pos
            CHECK(pos_fitness(a.pos, inst, config.rule, config.epsilon) ==
                  doctest::Approx(a.robust_makespan).epsilon(1e-12));
        }
    }
}

TEST_CASE("a single iteration evaluates exactly the initial list") {
    Instance t2 = load_fixture("t2.json");
    SearchConfig config;
    config.max_iterations = 1;
    config.seed = 11;
    config.record_trace = true;
    RobustResult res = robust_local_search(t2, config);
    CHECK(res.iterations_used == 1);
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].move == 'i');
    CHECK(res.trace[0].iteration == 1);
    REQUIRE(res.feasible_found);
    CHECK(pos_fitness(res.pos, t2, config.rule, config.epsilon) ==
          doctest::Approx(res.robust_makespan).epsilon(1e-12));
}

TEST_CASE("the trace satisfies the acceptance discipline") {
    Rng meta(1414);
    for (int t = 0; t < 5; ++t) {
        Instance inst = testsupport::random_instance(meta, 7, t % 2 == 0, 0.7);
        SearchConfig config;
        config.max_iterations = 200;
        config.seed = 70 + static_cast<uint64_t>(t);
        config.record_trace = true;
        RobustResult res = robust_local_search(inst, config);
        REQUIRE(res.trace.size() == 200);

        bool state = false;
        double best = std::numeric_limits<double>::infinity();
        double s_now = std::numeric_limits<double>::infinity();
        int feasible_iters = 0;
        for (std::size_t i = 0; i < res.trace.size(); ++i) {
            const TraceEntry& te = res.trace[i];
            CHECK(te.iteration == static_cast<int>(i) + 1);
            CHECK(te.state_feasible == state);
            if (state) CHECK(te.s_now == s_now);
            if (i == 0)
                CHECK(te.move == 'i');
            else
                CHECK(te.move == (state ? 's' : 'h'));

            if (te.neighbor_feasible) {
                CHECK(te.escape_draw == -1.0);
                CHECK(te.accepted == (!state || te.s_star <= s_now));
                best = std::min(best, te.s_star);
                if (te.accepted) {
                    state = true;
                    s_now = te.s_star;
                }
            } else if (state) {
                CHECK(te.escape_draw >= 0.0);
                CHECK(te.escape_draw < 1.0);
                CHECK(te.accepted == (te.escape_draw < config.escape_probability));
                if (te.accepted) {
                    state = false;
                    s_now = std::numeric_limits<double>::infinity();
                }
            } else {
                CHECK(te.escape_draw == -1.0);
                CHECK(te.accepted);
            }
            if (state) ++feasible_iters;
        }
        if (res.feasible_found) CHECK(res.robust_makespan == doctest::Approx(best).epsilon(1e-12));
        CHECK(res.feasible_fraction ==
              doctest::Approx(static_cast<double>(feasible_iters) / 200.0).epsilon(1e-12));
    }
}

TEST_CASE("search honors ordering decisions when enabled") {
    Instance inst;
    inst.capacities = {1};
    inst.activities.resize(5);
    for (int i = 0; i < 5; ++i) {
        inst.activities[static_cast<std::size_t>(i)].id = i;
        inst.activities[static_cast<std::size_t>(i)].demands = {0};
    }
    inst.activities[1].mean_duration = 1.0;
    inst.activities[1].demands = {1};
    inst.activities[2].mean_duration = 5.0;
    inst.activities[2].sigma = 1.0;
    inst.activities[2].demands = {1};
    inst.activities[3].mean_duration = 5.0;
    inst.activities[3].sigma = 1.0;
    inst.constraints.push_back({2, 3, LagKind::Min, 0.0, true});
    REQUIRE(validate_instance(inst).ok);

    SearchConfig config;
    config.ordering = true;
    config.og_samples = 50;
    config.max_iterations = 150;
    config.seed = 5;
    config.record_trace = true;
    RobustResult res = robust_local_search(inst, config);
    REQUIRE(res.feasible_found);
    REQUIRE_FALSE(res.decisions.empty());
    // the recovered decision also bounds the reported pos fitness vs a plain run
    SearchConfig plain = config;
    plain.ordering = false;
    RobustResult base = robust_local_search(inst, plain);
    REQUIRE(base.feasible_found);
    CHECK(res.robust_makespan <= base.robust_makespan + 1e-9);
}

TEST_CASE("epsilon is validated before any work") {
    Instance t1 = load_fixture("t1.json");
    SearchConfig config;
    config.epsilon = 1.5;
    CHECK_THROWS_AS(robust_local_search(t1, config), std::invalid_argument);
    config.epsilon = 0.0;
    CHECK_THROWS_AS(robust_local_search(t1, config), std::invalid_argument);
}
