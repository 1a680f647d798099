#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "doctest.h"
#include "lagco/env.hpp"
#include "lagco/envs.hpp"
#include "lagco/routing.hpp"
#include "lagco/rng.hpp"
#include "lagco/scenario.hpp"
#include "lagco/sweep.hpp"

using namespace lagco;

namespace {

Instance tsp_instance(std::vector<std::array<double, 2>> coords, ScoreBounds bounds) {
    Instance inst;
    inst.kind = EnvKind::Tsp;
    inst.id = "tsp_test";
    TspData d;
    d.num_cities = static_cast<int>(coords.size());
    d.max_coord = 1.0;
    d.coords = std::move(coords);
    inst.data = d;
    inst.bounds = bounds;
    return inst;
}

Instance path_min_vertex(ScoreBounds bounds) {
    // path a-b-c
    Instance inst;
    inst.kind = EnvKind::MinVertex;
    inst.id = "mvc_test";
    MinVertexData d;
    d.num_nodes = 3;
    d.edge_prob = 0.5;
    d.edges = {{0, 1}, {1, 2}};
    inst.data = d;
    inst.bounds = bounds;
    return inst;
}

Instance triangle_max_cut(ScoreBounds bounds) {
    Instance inst;
    inst.kind = EnvKind::MaxCut;
    inst.id = "maxcut_test";
    MaxCutData d;
    d.num_nodes = 3;
    d.max_weight = 1.0;
    d.edges = {{0, 1}, {0, 2}, {1, 2}};
    d.weights = {1.0, 1.0, 1.0};
    inst.data = d;
    inst.bounds = bounds;
    return inst;
}

// exhaustive tour enumeration with fixed first city
std::pair<double, double> brute_force_tsp(const TspData& d) {
    std::vector<int> perm(static_cast<size_t>(d.num_cities - 1));
    std::iota(perm.begin(), perm.end(), 1);
    double best = 1e300, worst = -1e300;
    do {
        std::vector<int> tour{0};
        tour.insert(tour.end(), perm.begin(), perm.end());
        double len = tsp_tour_length(d, tour);
        best = std::min(best, len);
        worst = std::max(worst, len);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {best, worst};
}

ActionDescriptor node_action(int v) { return {{ActionComponent::node(kMainGraph, v)}}; }

}  // namespace

TEST_CASE("tsp reset marks exactly one city visited") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    auto env = make_env(inst);
    env->reset(7);
    const Graph& g = env->graphs().at(kMainGraph);
    int attr = g.node_attr_index("visited");
    int count = 0;
    for (int v = 0; v < g.num_nodes(); ++v) count += g.node_value(attr, v) > 0.5 ? 1 : 0;
    CHECK(count == 1);
}

TEST_CASE("tsp with one of four cities visited offers three actions") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    auto env = make_env(inst);
    env->reset(3);
    CHECK(env->valid_actions().size() == 3);
}

TEST_CASE("tsp greedy perimeter tour on the unit square has raw length 4") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    auto env = make_env(inst);
    env->reset(1);
    const auto* tsp = dynamic_cast<const TspEnv*>(env.get());
    int start = tsp->tour().front();
    for (int i = 1; i < 4; ++i) {
        auto r = env->step(node_action((start + i) % 4));
        if (i == 3) CHECK(r.done);
    }
    CHECK(env->raw_objective() == doctest::Approx(4.0));
    CHECK(env->score() == doctest::Approx(1.0));  // best bound is 4.0
}

TEST_CASE("tsp rewards telescope to the normalized final tour") {
    Instance inst = tsp_instance({{0, 0}, {3, 0}, {1, 2}, {0, 4}, {5, 1}}, {20.0, 9.0});
    auto env = make_env(inst);
    env->reset(11);
    double initial_norm = inst.bounds->normalize(env->raw_objective());
    double acc = 0.0;
    Rng rng(5);
    while (!env->done()) {
        auto actions = env->valid_actions();
        acc += env->step(actions[static_cast<size_t>(rng.uniform_int(
                             0, static_cast<int64_t>(actions.size()) - 1))])
                   .reward;
    }
    CHECK(acc ==
          doctest::Approx(inst.bounds->normalize(env->raw_objective()) - initial_norm).epsilon(1e-9));
}

TEST_CASE("tsp incomplete episode scores zero under the hard constraint") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    EnvConfig cfg;
    cfg.strict = false;
    auto env = make_env(inst, cfg);
    env->reset(5);
    const auto* tsp = dynamic_cast<const TspEnv*>(env.get());
    // keep stepping the already-visited start city: wasted steps until cutoff
    int start = tsp->tour().front();
    while (!env->done()) env->step(node_action(start));
    CHECK_FALSE(env->solution_complete());
    CHECK(env->score() == 0.0);
}

TEST_CASE("strict mode rejects invalid actions") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    auto env = make_env(inst);
    env->reset(5);
    const auto* tsp = dynamic_cast<const TspEnv*>(env.get());
    CHECK_THROWS_AS(env->step(node_action(tsp->tour().front())), EnvError);
}

TEST_CASE("tsp optimal brute-force tour scores at least one") {
    Rng rng(99);
    Instance inst;
    inst.kind = EnvKind::Tsp;
    inst.id = "tsp6";
    TspData d;
    d.num_cities = 6;
    d.max_coord = 100;
    for (int i = 0; i < 6; ++i) d.coords.push_back({rng.uniform(0, 100), rng.uniform(0, 100)});
    auto [best, worst] = brute_force_tsp(d);
    inst.data = d;
    inst.bounds = ScoreBounds{worst, best + 1e-3};  // empirical best slightly above optimum
    auto env = make_env(inst);
    env->reset(1);
    const auto* tsp = dynamic_cast<const TspEnv*>(env.get());
    // brute-force optimal tour starting from the env's start city
    std::vector<int> others;
    for (int v = 0; v < 6; ++v)
        if (v != tsp->tour().front()) others.push_back(v);
    std::vector<int> best_order;
    double best_len = 1e300;
    std::sort(others.begin(), others.end());
    do {
        std::vector<int> tour{tsp->tour().front()};
        tour.insert(tour.end(), others.begin(), others.end());
        double len = tsp_tour_length(d, tour);
        if (len < best_len) {
            best_len = len;
            best_order = others;
        }
    } while (std::next_permutation(others.begin(), others.end()));
    for (int v : best_order) env->step(node_action(v));
    CHECK(env->done());
    CHECK(env->score() >= 1.0);
}

TEST_CASE("min vertex cover: selecting the middle of a path covers everything") {
    Instance inst = path_min_vertex({3.0, 1.0});
    auto env = make_env(inst);
    env->reset(0);
    auto r = env->step(node_action(1));
    CHECK(r.done);
    CHECK(env->solution_complete());
    CHECK(env->score() == doctest::Approx(1.0));  // cover size 1 == best
}

TEST_CASE("min vertex scoring endpoints: worst maps to 0, best to 1") {
    Instance inst = path_min_vertex({3.0, 1.0});
    CHECK(inst.bounds->normalize(3.0) == doctest::Approx(0.0));
    CHECK(inst.bounds->normalize(1.0) == doctest::Approx(1.0));
}

TEST_CASE("max cut reset has an empty cut and all nodes in partition zero") {
    Instance inst = triangle_max_cut({0.0, 2.0});
    auto env = make_env(inst);
    env->reset(0);
    CHECK(dynamic_cast<const MaxCutEnv*>(env.get())->cut_value() == 0.0);
    const Graph& g = env->graphs().at(kMainGraph);
    int attr = g.node_attr_index("partition");
    for (int v = 0; v < 3; ++v) CHECK(g.node_value(attr, v) == 0.0);
}

TEST_CASE("max cut flip on the unit triangle moves the cut from 0 to 2") {
    // brute force over the 8 partitions: max cut of a unit triangle is 2
    Instance inst = triangle_max_cut({0.0, 2.0});
    const auto& d = inst.as<MaxCutData>();
    double brute_best = 0;
    for (int mask = 0; mask < 8; ++mask) {
        std::vector<int> part{mask & 1, (mask >> 1) & 1, (mask >> 2) & 1};
        brute_best = std::max(brute_best, max_cut_value(d, part));
    }
    CHECK(brute_best == 2.0);
    auto env = make_env(inst);
    env->reset(0);
    auto r = env->step(node_action(0));
    CHECK(dynamic_cast<const MaxCutEnv*>(env.get())->cut_value() == 2.0);
    CHECK(r.reward == doctest::Approx(2.0 / inst.bounds->span()));
}

TEST_CASE("max cut step rewards telescope to the final cut value") {
    Rng rng(3);
    Instance inst = generate_scenario_with_size(EnvKind::MaxCut, 12, 0, 21);
    SweepConfig cfg;
    cfg.sweeps = 30;
    cfg.seed = 5;
    sweep_bounds(inst, cfg);
    auto env = make_env(inst);
    env->reset(9);
    double acc = 0.0;
    while (!env->done()) {
        auto actions = env->valid_actions();
        acc += env->step(actions[static_cast<size_t>(
                             rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))])
                   .reward;
    }
    const auto* mc = dynamic_cast<const MaxCutEnv*>(env.get());
    CHECK(acc * inst.bounds->span() == doctest::Approx(mc->cut_value()).epsilon(1e-9));
}

TEST_CASE("placement: an oversized vm appears in no action") {
    Instance inst;
    inst.kind = EnvKind::Placement;
    inst.id = "pl_test";
    PlacementData d;
    d.n_vms = 2;
    d.n_pms = 2;
    d.n_tenants = 2;
    d.vms.push_back({{100, 100, 100, 100}, 0.5, 0});  // fits only where it already sits
    d.vms.push_back({{1, 1, 1, 1}, 0.5, 1});
    d.pms.push_back({{120, 120, 120, 120}, 0.1, 50, 150});
    d.pms.push_back({{20, 20, 20, 20}, 0.1, 50, 150});
    d.latency.assign(4, 1.0);
    d.worst_alloc = {0, 0};
    inst.data = d;
    inst.bounds = ScoreBounds{1.0, 4.0};
    auto env = make_env(inst);
    env->reset(0);
    for (const auto& a : env->valid_actions()) CHECK(a.components[0].nodes[0] != 0);
}

TEST_CASE("placement objective rises when spreading relieves a packed machine") {
    Instance inst = generate_scenario_with_size(EnvKind::Placement, 6, 0, 77);
    SweepConfig cfg;
    cfg.sweeps = 40;
    cfg.steps_per_sweep = 20;
    cfg.seed = 3;
    sweep_bounds(inst, cfg);
    const auto& d = inst.as<PlacementData>();
    CHECK(placement_alloc_feasible(d, d.worst_alloc));
    CHECK(placement_alloc_feasible(d, d.best_alloc));
    CHECK(placement_objective(d, d.best_alloc) > placement_objective(d, d.worst_alloc));
    auto env = make_env(inst);
    env->reset(0);
    CHECK(env->raw_objective() == doctest::Approx(placement_objective(d, d.worst_alloc)));
}

TEST_CASE("ospf reset utilization matches routing on the worst weight vector") {
    Instance inst;
    inst.kind = EnvKind::Ospf;
    inst.id = "ospf_test";
    OspfData d;
    d.num_nodes = 4;
    d.edges = {{0, 1, 10}, {1, 2, 10}, {0, 2, 10}, {2, 3, 10}};
    d.demands = {{0, 3, 5}};
    d.min_weight = 1;
    d.max_weight = 5;
    d.ecmp = false;
    d.worst_weights = {1, 1, 3, 1};
    inst.data = d;
    inst.bounds = ScoreBounds{0.5, 0.1};
    auto env = make_env(inst);
    env->reset(0);
    // unique shortest path 0-1-2-3 of length 3 beats 0-2-3 of length 4,
    // so edges (0,1),(1,2),(2,3) each carry 5 of 10 capacity
    CHECK(dynamic_cast<const OspfEnv*>(env.get())->max_utilization() == doctest::Approx(0.5));
    CHECK(env->raw_objective() == doctest::Approx(ospf_max_utilization(d, d.worst_weights)));
}

TEST_CASE("ecmp splits flow equally over a diamond") {
    std::vector<NetEdge> edges{{0, 1, 10}, {0, 2, 10}, {1, 3, 10}, {2, 3, 10}};
    std::vector<double> weights{1, 1, 1, 1};
    std::vector<TrafficDemand> demands{{0, 3, 8}};
    auto load = route_demands(4, edges, weights, demands, true);
    for (double l : load) CHECK(l == doctest::Approx(4.0));
    auto single = route_demands(4, edges, weights, demands, false);
    CHECK(single[0] == doctest::Approx(8.0));  // deterministic tie toward node 1
    CHECK(single[1] == 0.0);
}

TEST_CASE("ospf valid actions stay inside weight bounds") {
    Instance inst;
    inst.kind = EnvKind::Ospf;
    inst.id = "ospf_test2";
    OspfData d;
    d.num_nodes = 3;
    d.edges = {{0, 1, 10}, {1, 2, 10}, {0, 2, 10}};
    d.demands = {{0, 2, 4}};
    d.worst_weights = {1, 1, 5};
    inst.data = d;
    inst.bounds = ScoreBounds{0.8, 0.1};
    auto env = make_env(inst);
    env->reset(0);
    for (const auto& a : env->valid_actions()) {
        int delta = a.components[1].option - 1;
        (void)delta;
        CHECK(env->is_valid(a));
    }
    // edge 0 at weight 1: decrement invalid; edge 2 at weight 5: increment invalid
    int n_edge0 = 0, n_edge2 = 0;
    for (const auto& a : env->valid_actions()) {
        if (a.components[0].nodes[0] == 0 && a.components[0].nodes[1] == 1) ++n_edge0;
        if (a.components[0].nodes[0] == 0 && a.components[0].nodes[1] == 2) ++n_edge2;
    }
    CHECK(n_edge0 == 2);
    CHECK(n_edge2 == 2);
}

namespace {

// independent path enumeration for the traffic oracle test
void enumerate_paths(const std::vector<std::vector<int>>& adj, int v, int dst, int max_len,
                     std::vector<int>& cur, std::set<int>& seen, int& count) {
    if (v == dst) {
        ++count;
        return;
    }
    if (static_cast<int>(cur.size()) - 1 >= max_len) return;
    for (int u : adj[static_cast<size_t>(v)]) {
        if (seen.count(u)) continue;
        seen.insert(u);
        cur.push_back(u);
        enumerate_paths(adj, u, dst, max_len, cur, seen, count);
        cur.pop_back();
        seen.erase(u);
    }
}

}  // namespace

TEST_CASE("traffic valid actions equal the exhaustive path enumeration count") {
    Instance inst;
    inst.kind = EnvKind::Traffic;
    inst.id = "traffic_test";
    TrafficData d;
    d.num_nodes = 10;
    // ring plus chords
    for (int i = 0; i < 10; ++i) d.edges.push_back({i, (i + 1) % 10, 1e9});
    d.edges.push_back({0, 5, 1e9});
    d.edges.push_back({2, 7, 1e9});
    d.demands = {{0, 3, 1.0}, {1, 6, 2.0}, {4, 9, 1.0}};
    d.max_path_len = 4;
    d.worst_assign = {0, 0, 0};
    inst.data = d;
    inst.bounds = ScoreBounds{0.9, 0.1};
    auto env = make_env(inst);
    env->reset(0);

    std::vector<std::vector<int>> adj(10);
    for (const auto& e : d.edges) {
        adj[static_cast<size_t>(e.u)].push_back(e.v);
        adj[static_cast<size_t>(e.v)].push_back(e.u);
    }
    int expected = 0;
    for (const auto& dem : d.demands) {
        std::vector<int> cur{dem.src};
        std::set<int> seen{dem.src};
        enumerate_paths(adj, dem.src, dem.dst, d.max_path_len, cur, seen, expected);
    }
    CHECK(static_cast<int>(env->valid_actions().size()) == expected);
}

TEST_CASE("traffic accepted moves never exceed capacity") {
    Instance inst = generate_scenario_with_size(EnvKind::Traffic, 10, 0, 5);
    SweepConfig cfg;
    cfg.sweeps = 20;
    cfg.seed = 2;
    sweep_bounds(inst, cfg);
    auto env = make_env(inst);
    env->reset(4);
    Rng rng(6);
    const auto& d = inst.as<TrafficData>();
    const auto* te = dynamic_cast<const TrafficEnv*>(env.get());
    for (int i = 0; i < 20 && !env->done(); ++i) {
        auto actions = env->valid_actions();
        env->step(actions[static_cast<size_t>(
            rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))]);
        CHECK(traffic_assignment_feasible(d, te->candidate_paths(), te->assignment()));
    }
}

TEST_CASE("cyber path reset compromises one node with partial visibility") {
    Instance inst = generate_scenario_with_size(EnvKind::CyberPath, 12, 0, 9);
    auto env = make_env(inst);
    env->reset(3);
    const auto* cp = dynamic_cast<const CyberPathEnv*>(env.get());
    CHECK(cp->compromised_count() == 1);
    CHECK(env->raw_objective() == 1.0);
    CHECK(!env->valid_actions().empty());
    // all actions target visible, uncompromised nodes with one of 5 vulns
    for (const auto& a : env->valid_actions()) {
        CHECK(a.components.size() == 3);
        CHECK(a.components[2].option < 5);
    }
}

TEST_CASE("cyber path full compromise reaches score one") {
    Instance inst = generate_scenario_with_size(EnvKind::CyberPath, 10, 0, 13);
    auto& d = inst.as<CyberData>();
    d.p_detection = 0.0;  // make every exploit land for the walk-through
    for (auto& node : d.vulns)
        for (auto& v : node) v.outcome = 0;
    auto env = make_env(inst);
    env->reset(1);
    while (!env->done()) {
        auto actions = env->valid_actions();
        env->step(actions[0]);
    }
    CHECK(env->score() == doctest::Approx(1.0));
}

TEST_CASE("environments replay identically under a fixed seed") {
    for (EnvKind kind : kAllEnvKinds) {
        CAPTURE(to_string(kind));
        Instance inst = generate_scenario_with_size(kind, 10, 0, 31);
        if (kind != EnvKind::CyberPath) {
            SweepConfig cfg;
            cfg.sweeps = 15;
            cfg.steps_per_sweep = 10;
            cfg.seed = 1;
            sweep_bounds(inst, cfg);
        }
        auto env = make_env(inst);
        env->reset(42);
        Rng rng(17);
        std::vector<ActionDescriptor> trace;
        std::vector<double> rewards;
        for (int i = 0; i < 15 && !env->done(); ++i) {
            auto actions = env->valid_actions();
            auto a = actions[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))];
            trace.push_back(a);
            rewards.push_back(env->step(a).reward);
        }
        bool was_done = env->done();
        double score = was_done ? env->score() : 0.0;
        // replay
        auto env2 = make_env(inst);
        env2->reset(42);
        for (size_t i = 0; i < trace.size(); ++i) {
            REQUIRE(env2->is_valid(trace[i]));
            CHECK(env2->step(trace[i]).reward == rewards[i]);
        }
        CHECK(env2->done() == was_done);
        if (was_done) CHECK(env2->score() == score);
    }
}

TEST_CASE("valid actions are always accepted by step") {
    for (EnvKind kind : kAllEnvKinds) {
        CAPTURE(to_string(kind));
        Instance inst = generate_scenario_with_size(kind, 10, 1, 53);
        if (kind != EnvKind::CyberPath) {
            SweepConfig cfg;
            cfg.sweeps = 10;
            cfg.steps_per_sweep = 10;
            cfg.seed = 2;
            sweep_bounds(inst, cfg);
        }
        auto env = make_env(inst);
        env->reset(8);
        Rng rng(23);
        for (int i = 0; i < 10 && !env->done(); ++i) {
            auto actions = env->valid_actions();
            REQUIRE(!actions.empty());
            for (const auto& a : actions) CHECK(env->is_valid(a));
            env->step(actions[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))]);
        }
    }
}

TEST_CASE("hard-constraint envs with positive score satisfy an independent validator") {
    Rng rng(1234);
    for (int trial = 0; trial < 30; ++trial) {
        Instance inst = generate_scenario_with_size(EnvKind::Tsp, 6, trial, 400 + trial);
        SweepConfig cfg;
        cfg.sweeps = 40;
        cfg.seed = trial;
        sweep_bounds(inst, cfg);
        auto env = make_env(inst);
        env->reset(static_cast<uint64_t>(trial));
        while (!env->done()) {
            auto actions = env->valid_actions();
            env->step(actions[static_cast<size_t>(
                rng.uniform_int(0, static_cast<int64_t>(actions.size()) - 1))]);
        }
        if (env->score() > 0.0) {
            const auto* tsp = dynamic_cast<const TspEnv*>(env.get());
            std::set<int> unique(tsp->tour().begin(), tsp->tour().end());
            CHECK(static_cast<int>(unique.size()) == inst.as<TspData>().num_cities);
        }
    }
}

TEST_CASE("score on a non-terminal state raises") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    auto env = make_env(inst);
    env->reset(0);
    CHECK_THROWS_AS(env->score(), EnvError);
}

TEST_CASE("envs without bounds refuse to start") {
    Instance inst = tsp_instance({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {10.0, 4.0});
    inst.bounds.reset();
    CHECK_THROWS_AS(make_env(inst), EnvError);
}
