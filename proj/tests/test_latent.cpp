#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lagco/envs.hpp"
#include "lagco/gae.hpp"
#include "lagco/latent.hpp"
#include "lagco/rng.hpp"
#include "lagco/scenario.hpp"
#include "lagco/sweep.hpp"

using namespace lagco;
using namespace lagco::latent;

namespace {

ad::Tensor small_z() { return ad::Tensor::matrix(2, 2, {1, 2, 3, 4}); }

ad::Tensor random_embeddings(Rng& rng, int n, int d) {
    std::vector<double> data(static_cast<size_t>(n) * d);
    for (auto& v : data) v = rng.uniform(-2.0, 2.0);
    return ad::Tensor::matrix(n, d, std::move(data));
}

std::vector<ActionDescriptor> index_actions(int n) {
    std::vector<ActionDescriptor> out;
    for (int i = 0; i < n; ++i) out.push_back({{ActionComponent::node(kMainGraph, i)}});
    return out;
}

}  // namespace

TEST_CASE("poolings of a 2x2 matrix match hand arithmetic") {
    ad::Tensor z = small_z();
    CHECK(pool_rows(z, Pooling::Mean) == std::vector<double>{2, 3});
    CHECK(pool_rows(z, Pooling::Sum) == std::vector<double>{4, 6});
    CHECK(pool_rows(z, Pooling::Max) == std::vector<double>{3, 4});
    CHECK(pool_rows(z, Pooling::Min) == std::vector<double>{1, 2});
}

TEST_CASE("path graph descriptors: 4 nodes, 3 edges, degree 1.5, density 0.5") {
    Graph g(4, false);
    g.add_edge(0, 1);
    g.add_edge(1, 2);
    g.add_edge(2, 3);
    CHECK(graph_descriptors(g) == std::vector<double>{4, 3, 1.5, 0.5});
}

TEST_CASE("observation is invariant under node permutation") {
    Instance inst = generate_scenario_with_size(EnvKind::MinVertex, 8, 0, 3);
    SweepConfig cfg;
    cfg.sweeps = 10;
    cfg.seed = 1;
    sweep_bounds(inst, cfg);
    auto env = make_env(inst);
    env->reset(1);
    gae::EncoderConfig ecfg;
    ecfg.hidden = 8;
    ecfg.out = 4;
    auto pack = gae::random_gae(EnvKind::MinVertex, inst, ecfg, 5);
    auto z = pack.encode_bundle(env->graphs());
    auto obs1 = build_observation(env->graphs(), z, nullptr);

    // permuted embedding rows and graph labels give the same observation
    const Graph& g = env->graphs().at(kMainGraph);
    std::vector<int> perm(static_cast<size_t>(g.num_nodes()));
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::reverse(perm.begin(), perm.end());
    const auto& zz = z.at(kMainGraph);
    std::vector<double> permuted(zz.data().size());
    for (int r = 0; r < zz.rows(); ++r)
        for (int c = 0; c < zz.cols(); ++c)
            permuted[static_cast<size_t>(perm[static_cast<size_t>(r)]) * zz.cols() + c] = zz.at(r, c);
    std::map<std::string, ad::Tensor> z2;
    z2[kMainGraph] = ad::Tensor::matrix(zz.rows(), zz.cols(), permuted);
    // structural descriptors are permutation invariant by construction; the
    // graph itself is reused since only Z rows entered the pooled blocks
    auto obs2 = build_observation(env->graphs(), z2, nullptr);
    REQUIRE(obs1.size() == obs2.size());
    for (size_t i = 0; i < obs1.size(); ++i) CHECK(obs1[i] == doctest::Approx(obs2[i]).epsilon(1e-12));
}

TEST_CASE("node component embeds as the exact row of Z") {
    ActionEmbedder e = ActionEmbedder::for_env(EnvKind::MaxCut, 2, Instance{});
    std::map<std::string, ad::Tensor> z{{kMainGraph, small_z()}};
    auto v = e.embed({{ActionComponent::node(kMainGraph, 1)}}, z);
    CHECK(v == std::vector<double>{3, 4});
}

TEST_CASE("edge component order matters") {
    ActionEmbedder e;
    e.env = EnvKind::Placement;
    e.p = 2;
    std::map<std::string, ad::Tensor> z{{kMainGraph, small_z()}};
    auto uv = e.embed_component(ActionComponent::edge(kMainGraph, 0, 1), z);
    auto vu = e.embed_component(ActionComponent::edge(kMainGraph, 1, 0), z);
    CHECK(uv == std::vector<double>{1, 2, 3, 4});
    CHECK(vu == std::vector<double>{3, 4, 1, 2});
}

TEST_CASE("length-2 path with pad width 4 zero-pads the tail") {
    ActionEmbedder e;
    e.env = EnvKind::Traffic;
    e.p = 2;
    e.path_pad_nodes = 4;
    std::map<std::string, ad::Tensor> z{{kCommGraph, small_z()}};
    auto v = e.embed_component(ActionComponent::path(kCommGraph, {0, 1}), z);
    CHECK(v == std::vector<double>{1, 2, 3, 4, 0, 0, 0, 0});
}

TEST_CASE("ospf action embedding is 2p+3 wide and ends in the delta one-hot") {
    Instance inst = generate_scenario_with_size(EnvKind::Ospf, 10, 0, 9);
    ActionEmbedder e = ActionEmbedder::for_env(EnvKind::Ospf, 16, inst);
    CHECK(e.dim() == 35);
    std::vector<double> zdata(static_cast<size_t>(10) * 16, 0.25);
    std::map<std::string, ad::Tensor> z{{kCommGraph, ad::Tensor::matrix(10, 16, zdata)}};
    ActionDescriptor a{{ActionComponent::edge(kCommGraph, 0, 1), ActionComponent::object("", 2)}};
    auto v = e.embed(a, z);
    REQUIRE(v.size() == 35);
    CHECK(v[32] == 0.0);
    CHECK(v[33] == 0.0);
    CHECK(v[34] == 1.0);  // delta = +1
}

TEST_CASE("cyber actions differing only in vulnerability text differ only in the hash block") {
    Instance inst = generate_scenario_with_size(EnvKind::CyberPath, 10, 0, 11);
    ActionEmbedder e = ActionEmbedder::for_env(EnvKind::CyberPath, 4, inst);
    Rng rng(2);
    std::map<std::string, ad::Tensor> z{{kAttackGraph, random_embeddings(rng, 10, 4)}};
    ActionDescriptor a1{{ActionComponent::node(kAttackGraph, 0), ActionComponent::node(kAttackGraph, 1),
                         ActionComponent::object("ssh buffer-overflow cve-1234", 0)}};
    ActionDescriptor a2{{ActionComponent::node(kAttackGraph, 0), ActionComponent::node(kAttackGraph, 1),
                         ActionComponent::object("sql injection cve-9999", 1)}};
    auto v1 = e.embed(a1, z);
    auto v2 = e.embed(a2, z);
    for (int i = 0; i < 8; ++i) CHECK(v1[static_cast<size_t>(i)] == v2[static_cast<size_t>(i)]);
    CHECK(v1 != v2);
}

TEST_CASE("feature hashing is deterministic and L1-normalized") {
    FeatureHashEncoder enc;
    auto a = enc.encode("smb default-creds cve-4242");
    auto b = enc.encode("smb default-creds cve-4242");
    CHECK(a == b);
    double l1 = 0.0;
    for (double v : a) l1 += std::abs(v);
    CHECK(l1 == doctest::Approx(1.0));
}

TEST_CASE("z-score normalization: values {0,2} map to {-1,+1} with box [-2,+2]") {
    auto stats = fit_latent_stats({{0.0}, {2.0}});
    CHECK(stats.mean[0] == 1.0);
    CHECK(stats.stddev[0] == 1.0);
    CHECK(stats.normalize({0.0})[0] == doctest::Approx(-1.0));
    CHECK(stats.normalize({2.0})[0] == doctest::Approx(1.0));
    CHECK(stats.lo[0] == doctest::Approx(-2.0));
    CHECK(stats.hi[0] == doctest::Approx(2.0));
}

TEST_CASE("fitted stats give zero mean and unit variance on the training set") {
    Rng rng(7);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 50; ++i) rows.push_back({rng.uniform(-3, 5), rng.uniform(10, 20), 7.0});
    auto stats = fit_latent_stats(rows);
    for (int d = 0; d < 2; ++d) {
        double mean = 0, var = 0;
        for (const auto& r : rows) mean += stats.normalize(r)[static_cast<size_t>(d)];
        mean /= static_cast<double>(rows.size());
        for (const auto& r : rows) {
            double c = stats.normalize(r)[static_cast<size_t>(d)] - mean;
            var += c * c;
        }
        var /= static_cast<double>(rows.size());
        CHECK(std::abs(mean) < 1e-6);
        CHECK(std::abs(var - 1.0) < 1e-6);
    }
    // zero-variance dimension: stddev clamps to 1
    CHECK(stats.stddev[2] == 1.0);
    // every training embedding lies strictly inside the box
    for (const auto& r : rows) {
        auto n = stats.normalize(r);
        for (size_t d = 0; d < n.size(); ++d) {
            CHECK(n[d] > stats.lo[d]);
            CHECK(n[d] < stats.hi[d]);
        }
    }
}

TEST_CASE("normalize then denormalize is the identity") {
    Rng rng(3);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 20; ++i) rows.push_back({rng.uniform(-1, 1), rng.uniform(100, 200)});
    auto stats = fit_latent_stats(rows);
    for (const auto& r : rows) {
        auto back = stats.denormalize(stats.normalize(r));
        for (size_t d = 0; d < r.size(); ++d) CHECK(std::abs(back[d] - r[d]) < 1e-12);
    }
}

TEST_CASE("latent space reports one row per action") {
    Rng rng(5);
    auto space = LatentSpace::build(index_actions(17), random_embeddings(rng, 17, 6), nullptr);
    CHECK(space.size() == 17);
    CHECK(space.dim() == 6);
}

TEST_CASE("frozen stats from instance A are reused on instance B") {
    Rng rng(9);
    auto a = LatentSpace::build(index_actions(10), random_embeddings(rng, 10, 3), nullptr);
    auto b = LatentSpace::build(index_actions(8), random_embeddings(rng, 8, 3), &a.stats());
    CHECK(b.stats().mean == a.stats().mean);
    CHECK(b.stats().stddev == a.stats().stddev);
}

TEST_CASE("a stored embedding decodes to its own action") {
    Rng rng(13);
    auto emb = random_embeddings(rng, 20, 4);
    auto space = LatentSpace::build(index_actions(20), emb, nullptr);
    for (int r = 0; r < 20; r += 5) {
        std::vector<double> proto(static_cast<size_t>(space.dim()));
        for (int c = 0; c < space.dim(); ++c) proto[static_cast<size_t>(c)] = space.normalized().at(r, c);
        CHECK(space.knn_decode(proto, 1)[0] == r);
    }
}

TEST_CASE("knn decode agrees with an exhaustive scan on 500 random embeddings") {
    Rng rng(17);
    int n = 500, d = 8;
    auto emb = random_embeddings(rng, n, d);
    auto space = LatentSpace::build(index_actions(n), emb, nullptr);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> proto(static_cast<size_t>(d));
        for (auto& v : proto) v = rng.uniform(-3, 3);
        proto = space.stats().clamp_to_box(proto);
        // independent scan with the same tie rule
        double qn = 0;
        for (double v : proto) qn += v * v;
        qn = std::sqrt(qn);
        int best = -1;
        double best_sim = -2;
        for (int r = 0; r < n; ++r) {
            double dot = 0, rn = 0;
            for (int c = 0; c < d; ++c) {
                dot += proto[static_cast<size_t>(c)] * space.normalized().at(r, c);
                rn += space.normalized().at(r, c) * space.normalized().at(r, c);
            }
            double sim = dot / (qn * std::sqrt(rn));
            if (sim > best_sim) {
                best_sim = sim;
                best = r;
            }
        }
        CHECK(space.knn_decode(proto, 1)[0] == best);
    }
}

TEST_CASE("masked actions are never decoded; a single valid action dominates") {
    Rng rng(19);
    auto space = LatentSpace::build(index_actions(10), random_embeddings(rng, 10, 3), nullptr);
    std::vector<char> mask(10, 0);
    mask[7] = 1;
    std::vector<double> proto{5.0, -5.0, 5.0};
    auto ranked = space.knn_decode(proto, 3, mask);
    REQUIRE(ranked.size() == 1);
    CHECK(ranked[0] == 7);
    std::vector<char> none(10, 0);
    CHECK_THROWS_AS(space.knn_decode(proto, 1, none), std::invalid_argument);
}

TEST_CASE("knn decode with k=n returns a total order consistent with cosine similarity") {
    Rng rng(23);
    int n = 40;
    auto space = LatentSpace::build(index_actions(n), random_embeddings(rng, n, 5), nullptr);
    std::vector<double> proto{1, 0, -1, 0.5, 0.2};
    auto ranked = space.knn_decode(proto, n);
    REQUIRE(static_cast<int>(ranked.size()) == n);
    auto clamped = space.stats().clamp_to_box(proto);
    auto sim = [&](int r) {
        double dot = 0, rn = 0, qn = 0;
        for (int c = 0; c < 5; ++c) {
            dot += clamped[static_cast<size_t>(c)] * space.normalized().at(r, c);
            rn += space.normalized().at(r, c) * space.normalized().at(r, c);
            qn += clamped[static_cast<size_t>(c)] * clamped[static_cast<size_t>(c)];
        }
        return dot / std::sqrt(rn * qn);
    };
    for (size_t i = 0; i + 1 < ranked.size(); ++i) CHECK(sim(ranked[i]) >= sim(ranked[i + 1]) - 1e-12);
}

TEST_CASE("interior protos are unchanged by clamping; exterior ones clamp to the box") {
    Rng rng(29);
    auto space = LatentSpace::build(index_actions(12), random_embeddings(rng, 12, 3), nullptr);
    std::vector<double> inside{0.0, 0.0, 0.0};
    CHECK(space.stats().clamp_to_box(inside) == inside);
    std::vector<double> outside{1e9, -1e9, 0.0};
    auto clamped = space.stats().clamp_to_box(outside);
    CHECK(clamped[0] == space.stats().hi[0]);
    CHECK(clamped[1] == space.stats().lo[1]);
    CHECK(space.knn_decode(outside, 1) == space.knn_decode(clamped, 1));
}

TEST_CASE("cmp@1 of two points is exactly one") {
    auto space = LatentSpace::build(index_actions(2), ad::Tensor::matrix(2, 2, {0, 0, 3, 4}), nullptr);
    CHECK(space.compactness(1) == doctest::Approx(1.0));
}

TEST_CASE("two tight clusters have higher cmp@1 than a regular grid") {
    std::vector<double> grid_data, cluster_data;
    for (int i = 0; i < 8; ++i) {
        grid_data.push_back(static_cast<double>(i));
        grid_data.push_back(0.0);
    }
    for (int i = 0; i < 4; ++i) {
        cluster_data.push_back(0.01 * i);
        cluster_data.push_back(0.0);
        cluster_data.push_back(100.0 + 0.01 * i);
        cluster_data.push_back(0.0);
    }
    auto grid = LatentSpace::build(index_actions(8), ad::Tensor::matrix(8, 2, grid_data), nullptr);
    auto clusters =
        LatentSpace::build(index_actions(8), ad::Tensor::matrix(8, 2, cluster_data), nullptr);
    CHECK(clusters.compactness(1) > grid.compactness(1));
}

TEST_CASE("cmp is invariant under global rescaling") {
    Rng rng(31);
    auto emb = random_embeddings(rng, 15, 4);
    auto scaled_data = emb.data();
    for (auto& v : scaled_data) v *= 37.5;
    auto a = LatentSpace::build(index_actions(15), emb, nullptr);
    auto b = LatentSpace::build(index_actions(15),
                                ad::Tensor::matrix(15, 4, std::move(scaled_data)), nullptr);
    CHECK(a.compactness(3) == doctest::Approx(b.compactness(3)).epsilon(1e-9));
}

TEST_CASE("compactness requires k+1 actions") {
    Rng rng(37);
    auto space = LatentSpace::build(index_actions(3), random_embeddings(rng, 3, 2), nullptr);
    CHECK_THROWS_AS(space.compactness(3), std::invalid_argument);
}

TEST_CASE("latent space dump and load round-trip") {
    Rng rng(41);
    Instance inst = generate_scenario_with_size(EnvKind::Ospf, 10, 0, 43);
    SweepConfig scfg;
    scfg.sweeps = 8;
    scfg.steps_per_sweep = 8;
    scfg.seed = 2;
    sweep_bounds(inst, scfg);
    auto env = make_env(inst);
    env->reset(1);
    gae::EncoderConfig ecfg;
    ecfg.hidden = 8;
    ecfg.out = 4;
    auto pack = gae::random_gae(EnvKind::Ospf, inst, ecfg, 7);
    auto z = pack.encode_bundle(env->graphs());
    ActionEmbedder embedder = ActionEmbedder::for_env(EnvKind::Ospf, 4, inst);
    auto actions = env->valid_actions();
    auto space = LatentSpace::build(actions, embedder.embed_all(actions, z), nullptr);
    space.dump("latent_roundtrip_test.lsp");
    auto loaded = LatentSpace::load("latent_roundtrip_test.lsp");
    CHECK(loaded.size() == space.size());
    CHECK(loaded.raw().data() == space.raw().data());
    CHECK(loaded.stats().mean == space.stats().mean);
    CHECK(loaded.actions() == space.actions());
    std::remove("latent_roundtrip_test.lsp");
}

TEST_CASE("embeddings are deterministic and injective on distinct node rows") {
    Rng rng(47);
    auto emb = random_embeddings(rng, 30, 4);
    auto space = LatentSpace::build(index_actions(30), emb, nullptr);
    CHECK_FALSE(space.has_collisions());
    // duplicate rows are reported
    std::vector<double> dup(emb.data());
    std::copy(dup.begin(), dup.begin() + 4, dup.begin() + 4);
    auto collided = LatentSpace::build(index_actions(30), ad::Tensor::matrix(30, 4, dup), nullptr);
    CHECK(collided.has_collisions());
}
