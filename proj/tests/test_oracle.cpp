#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "lagco/env.hpp"
#include "lagco/instance.hpp"
#include "lagco/scenario.hpp"
#include "lagco/sweep.hpp"

using namespace lagco;

namespace {

double brute_force_tsp_best(const TspData& d) {
    std::vector<int> perm(static_cast<size_t>(d.num_cities - 1));
    std::iota(perm.begin(), perm.end(), 1);
    double best = 1e300;
    do {
        std::vector<int> tour{0};
        tour.insert(tour.end(), perm.begin(), perm.end());
        best = std::min(best, tsp_tour_length(d, tour));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

int brute_force_min_cover(const MinVertexData& d) {
    int n = d.num_nodes;
    int best = n;
    for (int mask = 0; mask < (1 << n); ++mask) {
        std::vector<int> cover;
        for (int v = 0; v < n; ++v)
            if (mask & (1 << v)) cover.push_back(v);
        if (static_cast<int>(cover.size()) >= best) continue;
        if (min_vertex_is_cover(d, cover)) best = static_cast<int>(cover.size());
    }
    return best;
}

double brute_force_max_cut(const MaxCutData& d) {
    double best = 0.0;
    for (int mask = 0; mask < (1 << d.num_nodes); ++mask) {
        std::vector<int> part(static_cast<size_t>(d.num_nodes));
        for (int v = 0; v < d.num_nodes; ++v) part[static_cast<size_t>(v)] = (mask >> v) & 1;
        best = std::max(best, max_cut_value(d, part));
    }
    return best;
}

}  // namespace

TEST_CASE("generated tsp scenarios stay inside the parameter ranges") {
    auto instances = generate_scenarios(EnvKind::Tsp, 20, 42);
    for (const auto& inst : instances) {
        const auto& d = inst.as<TspData>();
        CHECK(d.num_cities >= 10);
        CHECK(d.num_cities <= 100);
        CHECK(d.max_coord >= 100.0);
        CHECK(d.max_coord <= 1000.0);
        for (const auto& c : d.coords) {
            CHECK(c[0] >= 0.0);
            CHECK(c[0] <= d.max_coord);
        }
    }
}

TEST_CASE("generation with count zero yields an empty set") {
    CHECK(generate_scenarios(EnvKind::MaxCut, 0, 42).empty());
}

TEST_CASE("generation is deterministic: same seed, byte-identical files") {
    for (EnvKind kind : kAllEnvKinds) {
        CAPTURE(to_string(kind));
        Instance a = generate_scenario_with_size(kind, 10, 3, 42);
        Instance b = generate_scenario_with_size(kind, 10, 3, 42);
        CHECK(instance_to_json(a) == instance_to_json(b));
        Instance c = generate_scenario_with_size(kind, 10, 3, 43);
        CHECK(instance_to_json(a) != instance_to_json(c));
    }
}

TEST_CASE("instance json round-trips") {
    for (EnvKind kind : kAllEnvKinds) {
        CAPTURE(to_string(kind));
        Instance a = generate_scenario_with_size(kind, 10, 0, 7);
        if (kind != EnvKind::CyberPath) {
            SweepConfig cfg;
            cfg.sweeps = 5;
            cfg.steps_per_sweep = 5;
            cfg.seed = 1;
            sweep_bounds(a, cfg);
        }
        Instance b = instance_from_json(instance_to_json(a));
        CHECK(instance_to_json(b) == instance_to_json(a));
    }
}

TEST_CASE("tsp sweep reaches the brute-force optimum on small instances") {
    for (int i = 0; i < 3; ++i) {
        Instance inst = generate_scenario_with_size(EnvKind::Tsp, 6 + i, i, 1000 + i);
        SweepConfig cfg;
        cfg.sweeps = 400;
        cfg.seed = static_cast<uint64_t>(i);
        sweep_bounds(inst, cfg);
        double brute = brute_force_tsp_best(inst.as<TspData>());
        CHECK(inst.bounds->best == doctest::Approx(brute).epsilon(1e-9));
        CHECK(inst.bounds->worst > inst.bounds->best);
    }
}

TEST_CASE("min vertex sweep on the 3-path finds cover 1, worst equals node count") {
    Instance inst;
    inst.kind = EnvKind::MinVertex;
    inst.id = "mvc_path";
    MinVertexData d;
    d.num_nodes = 3;
    d.edge_prob = 0.5;
    d.edges = {{0, 1}, {1, 2}};
    inst.data = d;
    SweepConfig cfg;
    cfg.sweeps = 50;
    cfg.seed = 3;
    sweep_bounds(inst, cfg);
    CHECK(inst.bounds->best == 1.0);
    CHECK(inst.bounds->worst == 3.0);
    CHECK(inst.as<MinVertexData>().best_cover.size() == 1);
}

TEST_CASE("min vertex sweep matches subset enumeration on random instances") {
    for (int i = 0; i < 3; ++i) {
        Instance inst = generate_scenario_with_size(EnvKind::MinVertex, 10, i, 2000 + i);
        SweepConfig cfg;
        cfg.sweeps = 300;
        cfg.seed = static_cast<uint64_t>(i);
        sweep_bounds(inst, cfg);
        CHECK(inst.bounds->best == doctest::Approx(brute_force_min_cover(inst.as<MinVertexData>())));
    }
}

TEST_CASE("max cut sweep on the unit triangle finds best 2, worst 0") {
    Instance inst;
    inst.kind = EnvKind::MaxCut;
    inst.id = "maxcut_tri";
    MaxCutData d;
    d.num_nodes = 3;
    d.max_weight = 1.0;
    d.edges = {{0, 1}, {0, 2}, {1, 2}};
    d.weights = {1, 1, 1};
    inst.data = d;
    SweepConfig cfg;
    cfg.sweeps = 20;
    cfg.seed = 0;
    sweep_bounds(inst, cfg);
    CHECK(inst.bounds->best == 2.0);
    CHECK(inst.bounds->worst == 0.0);
}

TEST_CASE("max cut sweep matches partition enumeration") {
    for (int i = 0; i < 2; ++i) {
        Instance inst = generate_scenario_with_size(EnvKind::MaxCut, 12, i, 3000 + i);
        SweepConfig cfg;
        cfg.sweeps = 150;
        cfg.seed = static_cast<uint64_t>(i);
        sweep_bounds(inst, cfg);
        CHECK(inst.bounds->best == doctest::Approx(brute_force_max_cut(inst.as<MaxCutData>())));
    }
}

TEST_CASE("best bound never worsens with more sweeps") {
    for (EnvKind kind : {EnvKind::Tsp, EnvKind::MinVertex, EnvKind::MaxCut, EnvKind::Ospf}) {
        CAPTURE(to_string(kind));
        Instance small = generate_scenario_with_size(kind, 10, 0, 71);
        Instance large = small;
        SweepConfig few;
        few.sweeps = 5;
        few.steps_per_sweep = 10;
        few.seed = 9;
        SweepConfig many = few;
        many.sweeps = 25;
        sweep_bounds(small, few);
        sweep_bounds(large, many);
        bool minimization = kind == EnvKind::Tsp || kind == EnvKind::MinVertex || kind == EnvKind::Ospf;
        if (minimization) {
            CHECK(large.bounds->best <= small.bounds->best + 1e-12);
            CHECK(large.bounds->worst >= small.bounds->worst - 1e-12);
        } else {
            CHECK(large.bounds->best >= small.bounds->best - 1e-12);
        }
    }
}

TEST_CASE("recorded best and worst solutions re-validate and re-score") {
    SweepConfig cfg;
    cfg.sweeps = 25;
    cfg.steps_per_sweep = 10;
    cfg.seed = 4;

    Instance tsp = generate_scenario_with_size(EnvKind::Tsp, 8, 0, 91);
    sweep_bounds(tsp, cfg);
    {
        const auto& d = tsp.as<TspData>();
        CHECK(tsp_tour_length(d, d.best_tour) == doctest::Approx(tsp.bounds->best));
        CHECK(tsp_tour_length(d, d.worst_tour) == doctest::Approx(tsp.bounds->worst));
        std::vector<int> sorted = d.best_tour;
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < d.num_cities; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);
    }

    Instance mvc = generate_scenario_with_size(EnvKind::MinVertex, 10, 0, 92);
    sweep_bounds(mvc, cfg);
    {
        const auto& d = mvc.as<MinVertexData>();
        CHECK(min_vertex_is_cover(d, d.best_cover));
        CHECK(static_cast<double>(d.best_cover.size()) == mvc.bounds->best);
    }

    Instance mc = generate_scenario_with_size(EnvKind::MaxCut, 10, 0, 93);
    sweep_bounds(mc, cfg);
    {
        const auto& d = mc.as<MaxCutData>();
        CHECK(max_cut_value(d, d.best_partition) == doctest::Approx(mc.bounds->best));
    }

    Instance ospf = generate_scenario_with_size(EnvKind::Ospf, 10, 0, 94);
    sweep_bounds(ospf, cfg);
    {
        const auto& d = ospf.as<OspfData>();
        CHECK(ospf_max_utilization(d, d.best_weights) == doctest::Approx(ospf.bounds->best));
        CHECK(ospf_max_utilization(d, d.worst_weights) == doctest::Approx(ospf.bounds->worst));
        for (int w : d.best_weights) {
            CHECK(w >= d.min_weight);
            CHECK(w <= d.max_weight);
        }
    }

    Instance traffic = generate_scenario_with_size(EnvKind::Traffic, 10, 0, 95);
    sweep_bounds(traffic, cfg);
    {
        const auto& d = traffic.as<TrafficData>();
        auto paths = traffic_candidate_paths(d);
        CHECK(traffic_assignment_feasible(d, paths, d.best_assign));
        CHECK(traffic_assignment_feasible(d, paths, d.worst_assign));
        CHECK(traffic_max_utilization(d, paths, d.best_assign) == doctest::Approx(traffic.bounds->best));
    }

    Instance pl = generate_scenario_with_size(EnvKind::Placement, 8, 0, 96);
    sweep_bounds(pl, cfg);
    {
        const auto& d = pl.as<PlacementData>();
        CHECK(placement_alloc_feasible(d, d.best_alloc));
        CHECK(placement_alloc_feasible(d, d.worst_alloc));
        CHECK(placement_objective(d, d.best_alloc) == doctest::Approx(pl.bounds->best));
        CHECK(placement_objective(d, d.worst_alloc) == doctest::Approx(pl.bounds->worst));
    }
}

TEST_CASE("normalization endpoints are exact after sweeping") {
    Instance inst = generate_scenario_with_size(EnvKind::MaxCut, 10, 0, 101);
    SweepConfig cfg;
    cfg.sweeps = 20;
    cfg.seed = 8;
    sweep_bounds(inst, cfg);
    CHECK(inst.bounds->normalize(inst.bounds->worst) == 0.0);
    CHECK(inst.bounds->normalize(inst.bounds->best) == 1.0);
}

TEST_CASE("cyber path bounds come from the node count") {
    Instance inst = generate_scenario_with_size(EnvKind::CyberPath, 15, 0, 55);
    REQUIRE(inst.bounds.has_value());
    CHECK(inst.bounds->worst == 1.0);
    CHECK(inst.bounds->best == 15.0);
}
