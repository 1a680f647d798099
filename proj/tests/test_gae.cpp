#include <cmath>

#include "doctest.h"
#include "lagco/envs.hpp"
#include "lagco/gae.hpp"
#include "lagco/scenario.hpp"
#include "lagco/sweep.hpp"

using namespace lagco;
using namespace lagco::gae;

namespace {

Graph mixed_graph() {
    // 4 nodes with binary + categorical + continuous attributes, weighted edges
    Graph g(4, false);
    g.add_node_attribute({"flag", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"cls", AttrKind::Categorical, 3, AttrNorm::None});
    g.add_node_attribute({"pos", AttrKind::Continuous, 2, AttrNorm::MinMax});
    g.add_edge_attribute({"w", AttrKind::Continuous, 1, AttrNorm::MinMax});
    double flags[] = {1, 0, 0, 1};
    double cls[] = {0, 2, 1, 0};
    double pos[][2] = {{0.1, 0.9}, {0.4, 0.2}, {0.8, 0.5}, {0.3, 0.7}};
    for (int v = 0; v < 4; ++v) {
        g.set_node_value(0, v, flags[v]);
        g.set_node_value(1, v, cls[v]);
        g.set_node_value(2, v, pos[v][0], 0);
        g.set_node_value(2, v, pos[v][1], 1);
    }
    int e1 = g.add_edge(0, 1);
    int e2 = g.add_edge(1, 2);
    int e3 = g.add_edge(2, 3);
    g.set_edge_value(0, e1, 0.3);
    g.set_edge_value(0, e2, 0.8);
    g.set_edge_value(0, e3, 0.5);
    return g;
}

EncoderConfig tiny_config() {
    EncoderConfig cfg;
    cfg.num_layers = 2;
    cfg.hidden = 8;
    cfg.out = 4;
    return cfg;
}

Graph permuted_copy(const Graph& g, const std::vector<int>& perm) {
    Graph out(g.num_nodes(), g.directed());
    for (const auto& s : g.node_schemas()) out.add_node_attribute(s);
    for (const auto& s : g.edge_schemas()) out.add_edge_attribute(s);
    for (int v = 0; v < g.num_nodes(); ++v)
        for (size_t a = 0; a < g.node_schemas().size(); ++a)
            for (int d = 0; d < g.node_schemas()[a].storage_dim(); ++d)
                out.set_node_value(static_cast<int>(a), perm[static_cast<size_t>(v)],
                                   g.node_value(static_cast<int>(a), v, d), d);
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [u, v] = g.edges()[static_cast<size_t>(e)];
        int ne = out.add_edge(perm[static_cast<size_t>(u)], perm[static_cast<size_t>(v)]);
        for (size_t a = 0; a < g.edge_schemas().size(); ++a)
            for (int d = 0; d < g.edge_schemas()[a].storage_dim(); ++d)
                out.set_edge_value(static_cast<int>(a), ne, g.edge_value(static_cast<int>(a), e, d),
                                   d);
    }
    return out;
}

}  // namespace

TEST_CASE("isolated nodes get a zero aggregate and finite embeddings") {
    Graph g(3, false);
    g.add_node_attribute({"x", AttrKind::Continuous, 2, AttrNorm::None});
    g.add_edge_attribute({"w", AttrKind::Continuous, 1, AttrNorm::None});
    g.set_node_value(0, 0, 0.5, 0);
    g.set_node_value(0, 1, 0.25, 1);
    int e = g.add_edge(0, 1);  // node 2 stays isolated
    g.set_edge_value(0, e, 1.0);
    Rng rng(5);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    auto z = model.encode_values(g);
    for (double v : z.data()) CHECK(std::isfinite(v));
    CHECK(z.rows() == 3);
}

TEST_CASE("encoder output rows have unit norm") {
    Graph g = mixed_graph();
    Rng rng(7);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    auto z = model.encode_values(g);
    for (int i = 0; i < z.rows(); ++i) {
        double sq = 0.0;
        for (int d = 0; d < z.cols(); ++d) sq += z.at(i, d) * z.at(i, d);
        CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("encode is permutation-equivariant") {
    Graph g = mixed_graph();
    std::vector<int> perm{2, 0, 3, 1};
    Graph pg = permuted_copy(g, perm);
    Rng rng(11);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    auto z = model.encode_values(g);
    auto pz = model.encode_values(pg);
    for (int v = 0; v < 4; ++v)
        for (int d = 0; d < z.cols(); ++d)
            CHECK(pz.at(perm[static_cast<size_t>(v)], d) == doctest::Approx(z.at(v, d)).epsilon(1e-9));
}

TEST_CASE("identical features and neighborhoods give identical embeddings") {
    // two leaves hanging off a hub with equal features
    Graph g(3, false);
    g.add_node_attribute({"x", AttrKind::Continuous, 1, AttrNorm::None});
    g.add_edge_attribute({"w", AttrKind::Continuous, 1, AttrNorm::None});
    g.set_node_value(0, 0, 1.0);
    g.set_node_value(0, 1, 0.5);
    g.set_node_value(0, 2, 0.5);
    g.set_edge_value(0, g.add_edge(0, 1), 0.7);
    g.set_edge_value(0, g.add_edge(0, 2), 0.7);
    Rng rng(3);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    auto z = model.encode_values(g);
    for (int d = 0; d < z.cols(); ++d) CHECK(z.at(1, d) == doctest::Approx(z.at(2, d)).epsilon(1e-12));
}

TEST_CASE("gae loss is invariant under node permutation") {
    Graph g = mixed_graph();
    std::vector<int> perm{3, 1, 0, 2};
    Graph pg = permuted_copy(g, perm);
    Rng rng(13);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    LossWeights w;
    CHECK(model.eval_loss(g, w) == doctest::Approx(model.eval_loss(pg, w)).epsilon(1e-9));
}

TEST_CASE("perfect continuous reconstruction with only the node term gives zero loss") {
    Graph g(2, false);
    g.add_node_attribute({"x", AttrKind::Continuous, 2, AttrNorm::None});
    g.set_node_value(0, 0, 0.25, 0);
    g.set_node_value(0, 0, 0.5, 1);
    g.set_node_value(0, 1, 0.75, 0);
    g.set_node_value(0, 1, 1.0, 1);
    Rng rng(1);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    GaeModel::Reconstruction rec;
    rec.node_heads.push_back(ad::Tensor::matrix(2, 2, {0.25, 0.5, 0.75, 1.0}));
    rec.adjacency = ad::Tensor::zeros({2, 2});
    LossWeights w;
    w.beta = 0.0;
    w.gamma = 0.0;
    ad::Tensor z = ad::Tensor::zeros({2, 4});
    CHECK(model.loss(rec, z, g, w).value() == 0.0);
}

TEST_CASE("binary head logit zero corresponds to probability one half") {
    CHECK(ad::sigmoid(ad::Tensor::scalar(0.0)).value() == doctest::Approx(0.5));
}

TEST_CASE("adjacency scores are symmetric for undirected graphs") {
    Graph g = mixed_graph();
    Rng rng(21);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    ad::Tape tape;
    nn::ParamContext pc(tape, model.params());
    auto z = model.encode(pc, g);
    auto rec = model.decode(pc, z, g);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(rec.adjacency.at(i, j) == doctest::Approx(rec.adjacency.at(j, i)).epsilon(1e-12));
}

TEST_CASE("two-node InfoNCE vanishes when the only candidate is the positive") {
    Graph g(2, false);
    g.add_node_attribute({"x", AttrKind::Continuous, 1, AttrNorm::None});
    g.add_edge(0, 1);
    Rng rng(2);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    LossWeights w;
    w.alpha = 0.0;
    w.beta = 0.0;
    ad::Tape tape;
    nn::ParamContext pc(tape, model.params());
    auto z = model.encode(pc, g);
    auto rec = model.decode(pc, z, g);
    CHECK(model.loss(rec, z, g, w).value() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("all gradient paths match finite differences on a 4-node graph") {
    Graph g = mixed_graph();
    Graph gn = normalize_features(g);
    Rng rng(31);
    GaeModel model = GaeModel::create(gn, tiny_config(), rng);
    LossWeights w;

    ad::Tape tape;
    nn::ParamContext pc(tape, model.params());
    auto loss = model.forward_loss(pc, gn, w);
    auto grads = pc.named_grads(tape.backward(loss));

    const double h = 1e-5;
    for (const auto& name : model.params().names()) {
        auto git = grads.find(name);
        REQUIRE(git != grads.end());
        auto& p = model.params().at(name);
        for (size_t i = 0; i < p.data().size(); ++i) {
            double orig = p.data()[i];
            p.data()[i] = orig + h;
            double up = model.eval_loss(gn, w);
            p.data()[i] = orig - h;
            double down = model.eval_loss(gn, w);
            p.data()[i] = orig;
            double numeric = (up - down) / (2.0 * h);
            double analytic = git->second[i];
            double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
            CAPTURE(name);
            CAPTURE(i);
            CHECK(std::abs(numeric - analytic) / scale < 1e-4);
        }
    }
}

TEST_CASE("seeded gae training is bit-reproducible") {
    auto instances = generate_scenarios(EnvKind::MinVertex, 2, 7);
    SweepConfig scfg;
    scfg.sweeps = 10;
    scfg.seed = 1;
    for (auto& inst : instances) {
        // pin sizes small for speed
        inst = generate_scenario_with_size(EnvKind::MinVertex, 8, 0, inst.seed);
        sweep_bounds(inst, scfg);
    }
    GaeTrainConfig cfg;
    cfg.epochs = 2;
    cfg.rollouts_per_instance = 2;
    cfg.min_pool_factor = 0;
    cfg.seed = 42;
    EncoderConfig enc = tiny_config();
    auto a = train_gae(EnvKind::MinVertex, instances, enc, {}, cfg);
    auto b = train_gae(EnvKind::MinVertex, instances, enc, {}, cfg);
    const auto& pa = a.pack.models.at(kMainGraph).params();
    const auto& pb = b.pack.models.at(kMainGraph).params();
    REQUIRE(pa.names() == pb.names());
    for (const auto& name : pa.names()) CHECK(pa.at(name).data() == pb.at(name).data());
}

TEST_CASE("short training already reduces holdout loss") {
    std::vector<Instance> instances;
    SweepConfig scfg;
    scfg.sweeps = 30;
    scfg.seed = 2;
    for (int i = 0; i < 3; ++i) {
        Instance inst = generate_scenario_with_size(EnvKind::Tsp, 8, i, 500 + i);
        sweep_bounds(inst, scfg);
        instances.push_back(inst);
    }
    GaeTrainConfig cfg;
    cfg.epochs = 10;
    cfg.rollouts_per_instance = 4;
    cfg.min_pool_factor = 0;
    cfg.seed = 11;
    EncoderConfig enc = tiny_config();
    auto result = train_gae(EnvKind::Tsp, instances, enc, {}, cfg);
    CHECK(result.final_holdout_loss.at(kMainGraph) < result.initial_holdout_loss.at(kMainGraph));
}

TEST_CASE("gae checkpoint round-trips the encoder") {
    Graph g = mixed_graph();
    Rng rng(17);
    GaePack pack;
    pack.env = EnvKind::MinVertex;
    pack.models.emplace(kMainGraph, GaeModel::create(g, tiny_config(), rng));
    std::string path = "gae_roundtrip_test.bin";
    save_gae(path, pack);
    GaePack loaded = load_gae(path);
    auto z1 = pack.models.at(kMainGraph).encode_values(g);
    auto z2 = loaded.models.at(kMainGraph).encode_values(g);
    CHECK(z1.data() == z2.data());
    CHECK_FALSE(loaded.models.at(kMainGraph).has_decoder());
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}

TEST_CASE("encode rejects graphs with mismatched schemas") {
    Graph g = mixed_graph();
    Rng rng(19);
    GaeModel model = GaeModel::create(g, tiny_config(), rng);
    Graph other(4, false);
    other.add_node_attribute({"different", AttrKind::Continuous, 5, AttrNorm::None});
    CHECK_THROWS_AS(model.encode_values(other), GraphError);
}
