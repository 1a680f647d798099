#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "lagco/graph.hpp"
#include "lagco/graph_io.hpp"
#include "lagco/rng.hpp"

using namespace lagco;

namespace {

Graph line_graph_with_distances(const std::vector<double>& xs) {
    int n = static_cast<int>(xs.size());
    Graph g(n, false);
    g.add_edge_attribute({"dist", AttrKind::Continuous, 1, AttrNorm::MinMax});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            int e = g.add_edge(i, j);
            g.set_edge_value(0, e, std::abs(xs[j] - xs[i]));
        }
    return g;
}

}  // namespace

TEST_CASE("min-max normalization maps a column to [0,1]") {
    Graph g(3, false);
    g.add_node_attribute({"load", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.set_node_value(0, 0, 10);
    g.set_node_value(0, 1, 20);
    g.set_node_value(0, 2, 30);
    Graph n = normalize_features(g);
    CHECK(n.node_values(0) == std::vector<double>{0.0, 0.5, 1.0});
}

TEST_CASE("constant min-max column maps to zero") {
    Graph g(3, false);
    g.add_node_attribute({"c", AttrKind::Continuous, 1, AttrNorm::MinMax});
    for (int i = 0; i < 3; ++i) g.set_node_value(0, i, 5.0);
    Graph n = normalize_features(g);
    CHECK(n.node_values(0) == std::vector<double>{0.0, 0.0, 0.0});
}

TEST_CASE("l1 normalization divides each row by its l1 norm") {
    Graph g(1, false);
    g.add_node_attribute({"emb", AttrKind::Continuous, 3, AttrNorm::L1});
    g.set_node_value(0, 0, 2.0, 0);
    g.set_node_value(0, 0, -2.0, 1);
    g.set_node_value(0, 0, 4.0, 2);
    Graph n = normalize_features(g);
    CHECK(n.node_values(0) == std::vector<double>{0.25, -0.25, 0.5});
}

TEST_CASE("min-max normalization is idempotent") {
    Rng rng(4);
    Graph g(6, false);
    g.add_node_attribute({"v", AttrKind::Continuous, 2, AttrNorm::MinMax});
    for (int i = 0; i < 6; ++i)
        for (int d = 0; d < 2; ++d) g.set_node_value(0, i, rng.uniform(-5, 5), d);
    Graph once = normalize_features(g);
    Graph twice = normalize_features(once);
    CHECK(once.node_values(0) == twice.node_values(0));
}

TEST_CASE("binary and categorical attributes are untouched by normalization") {
    Graph g(2, false);
    g.add_node_attribute({"flag", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"cls", AttrKind::Categorical, 3, AttrNorm::None});
    g.set_node_value(0, 1, 1.0);
    g.set_node_value(1, 0, 2.0);
    Graph n = normalize_features(g);
    CHECK(n.node_values(0) == g.node_values(0));
    CHECK(n.node_values(1) == g.node_values(1));
}

TEST_CASE("sparsify_knn on a line keeps each node's nearest neighbor") {
    // nodes at x = 0, 1, 3, 7; exhaustive-sort oracle picks each node's closest
    Graph g = line_graph_with_distances({0, 1, 3, 7});
    Graph s = sparsify_knn(g, 1, "dist");
    // 0->1 (d=1), 1->0 (d=1), 2->1 (d=2), 3->2 (d=4): union
    std::vector<std::pair<int, int>> expected{{0, 1}, {1, 2}, {2, 3}};
    auto edges = s.edges();
    std::sort(edges.begin(), edges.end());
    CHECK(edges == expected);
}

TEST_CASE("sparsify_knn with k=|V|-1 keeps a complete graph unchanged") {
    Graph g = line_graph_with_distances({0, 2, 5, 6});
    Graph s = sparsify_knn(g, 3, "dist");
    CHECK(s.num_edges() == g.num_edges());
}

TEST_CASE("sparsify_knn with k >= |V| returns the graph unchanged") {
    Graph g = line_graph_with_distances({0, 2, 5});
    Graph s = sparsify_knn(g, 3, "dist");
    CHECK(s.edges() == g.edges());
}

TEST_CASE("sparsify_knn on a unit square with k=2 drops the diagonals") {
    // square corners: 0=(0,0) 1=(1,0) 2=(1,1) 3=(0,1); brute-force distances
    std::vector<std::pair<double, double>> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    Graph g(4, false);
    g.add_edge_attribute({"dist", AttrKind::Continuous, 1, AttrNorm::None});
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            int e = g.add_edge(i, j);
            double dx = pts[i].first - pts[j].first, dy = pts[i].second - pts[j].second;
            g.set_edge_value(0, e, std::sqrt(dx * dx + dy * dy));
        }
    Graph s = sparsify_knn(g, 2, "dist");
    CHECK(s.num_edges() == 4);
    CHECK(s.find_edge(0, 2) == -1);
    CHECK(s.find_edge(1, 3) == -1);
}

TEST_CASE("sparsify_knn keeps at most k*|V| edges and only input edges") {
    Rng rng(12);
    int n = 12;
    Graph g(n, false);
    g.add_edge_attribute({"w", AttrKind::Continuous, 1, AttrNorm::None});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            int e = g.add_edge(i, j);
            g.set_edge_value(0, e, rng.uniform(0, 10));
        }
    for (int k = 1; k <= 4; ++k) {
        Graph s = sparsify_knn(g, k, "w");
        CHECK(s.num_edges() <= k * n);
        for (const auto& [u, v] : s.edges()) CHECK(g.find_edge(u, v) >= 0);
    }
}

TEST_CASE("graph json round-trips bit-exactly") {
    Rng rng(77);
    Graph g(5, true);
    g.add_node_attribute({"flag", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"pos", AttrKind::Continuous, 2, AttrNorm::MinMax});
    g.add_node_attribute({"kind", AttrKind::Categorical, 4, AttrNorm::None});
    g.add_edge_attribute({"w", AttrKind::Continuous, 1, AttrNorm::MinMax});
    for (int i = 0; i < 5; ++i) {
        g.set_node_value(0, i, rng.bernoulli(0.5) ? 1.0 : 0.0);
        g.set_node_value(1, i, rng.uniform(-3, 3), 0);
        g.set_node_value(1, i, rng.uniform(-3, 3), 1);
        g.set_node_value(2, i, static_cast<double>(rng.uniform_int(0, 3)));
    }
    for (auto [u, v] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {4, 0}, {3, 2}}) {
        int e = g.add_edge(u, v);
        g.set_edge_value(0, e, rng.uniform(0, 1));
    }
    std::string text = graph_to_json(g);
    Graph back = graph_from_json(text);
    CHECK(back.num_nodes() == g.num_nodes());
    CHECK(back.directed() == g.directed());
    CHECK(back.edges() == g.edges());
    for (int a = 0; a < 3; ++a) CHECK(back.node_values(a) == g.node_values(a));
    CHECK(back.edge_values(0) == g.edge_values(0));
    // serialization is stable: same text both times
    CHECK(graph_to_json(back) == text);
}

TEST_CASE("bundle json keeps names and graphs") {
    GraphBundle b;
    b["comm_G"] = Graph(3, false);
    b["traffic_G"] = Graph(3, true);
    auto back = bundle_from_json(bundle_to_json(b));
    REQUIRE(back.size() == 2);
    CHECK(back.count("comm_G") == 1);
    CHECK(back.at("traffic_G").directed());
}

TEST_CASE("duplicate edges are rejected by validate") {
    Graph g(3, false);
    g.add_edge(0, 1);
    g.add_edge(1, 0);  // same undirected edge
    CHECK_THROWS_AS(g.validate(), GraphError);
}

TEST_CASE("feature matrix one-hot encodes categoricals") {
    Graph g(2, false);
    g.add_node_attribute({"cls", AttrKind::Categorical, 3, AttrNorm::None});
    g.add_node_attribute({"x", AttrKind::Continuous, 1, AttrNorm::None});
    g.set_node_value(0, 0, 2.0);
    g.set_node_value(0, 1, 0.0);
    g.set_node_value(1, 0, 0.5);
    g.set_node_value(1, 1, -1.5);
    auto m = node_feature_matrix(g);
    CHECK(m.shape() == ad::Shape{2, 4});
    CHECK(m.data() == std::vector<double>{0, 0, 1, 0.5, 1, 0, 0, -1.5});
}
