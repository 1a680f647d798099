#include "lagco/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

namespace lagco {

std::string to_string(AttrKind kind) {
    switch (kind) {
        case AttrKind::Binary: return "binary";
        case AttrKind::Categorical: return "categorical";
        case AttrKind::Continuous: return "continuous";
    }
    return "?";
}

std::string to_string(AttrNorm norm) {
    switch (norm) {
        case AttrNorm::None: return "none";
        case AttrNorm::MinMax: return "min_max";
        case AttrNorm::L1: return "l1";
    }
    return "?";
}

AttrKind attr_kind_from_string(const std::string& s) {
    if (s == "binary") return AttrKind::Binary;
    if (s == "categorical") return AttrKind::Categorical;
    if (s == "continuous") return AttrKind::Continuous;
    throw GraphError("unknown attribute kind: " + s);
}

AttrNorm attr_norm_from_string(const std::string& s) {
    if (s == "none") return AttrNorm::None;
    if (s == "min_max") return AttrNorm::MinMax;
    if (s == "l1") return AttrNorm::L1;
    throw GraphError("unknown normalization: " + s);
}

void AttributeSchema::validate() const {
    if (kind == AttrKind::Categorical && size < 2)
        throw GraphError("attribute " + name + ": categorical needs >= 2 classes");
    if (kind == AttrKind::Continuous && size < 1)
        throw GraphError("attribute " + name + ": continuous needs dim >= 1");
    if (kind == AttrKind::Binary && size != 1)
        throw GraphError("attribute " + name + ": binary attributes are scalar");
}

void Graph::add_node_attribute(const AttributeSchema& schema) {
    schema.validate();
    node_schemas_.push_back(schema);
    node_values_.emplace_back(static_cast<size_t>(num_nodes_) * schema.storage_dim(), 0.0);
}

void Graph::add_edge_attribute(const AttributeSchema& schema) {
    schema.validate();
    edge_schemas_.push_back(schema);
    edge_values_.emplace_back(edges_.size() * static_cast<size_t>(schema.storage_dim()), 0.0);
}

int Graph::node_attr_index(const std::string& name) const {
    for (size_t i = 0; i < node_schemas_.size(); ++i)
        if (node_schemas_[i].name == name) return static_cast<int>(i);
    throw GraphError("unknown node attribute: " + name);
}

int Graph::edge_attr_index(const std::string& name) const {
    for (size_t i = 0; i < edge_schemas_.size(); ++i)
        if (edge_schemas_[i].name == name) return static_cast<int>(i);
    throw GraphError("unknown edge attribute: " + name);
}

int Graph::add_edge(int u, int v) {
    if (u < 0 || u >= num_nodes_ || v < 0 || v >= num_nodes_)
        throw GraphError("edge endpoint out of range: (" + std::to_string(u) + "," +
                         std::to_string(v) + ") with " + std::to_string(num_nodes_) + " nodes");
    if (u == v) throw GraphError("self-loop not supported: " + std::to_string(u));
    if (!directed_ && u > v) std::swap(u, v);
    edges_.emplace_back(u, v);
    for (size_t a = 0; a < edge_schemas_.size(); ++a)
        edge_values_[a].resize(edges_.size() * static_cast<size_t>(edge_schemas_[a].storage_dim()),
                               0.0);
    return static_cast<int>(edges_.size()) - 1;
}

int Graph::find_edge(int u, int v) const {
    if (!directed_ && u > v) std::swap(u, v);
    for (size_t i = 0; i < edges_.size(); ++i)
        if (edges_[i].first == u && edges_[i].second == v) return static_cast<int>(i);
    return -1;
}

double Graph::node_value(int attr, int node, int d) const {
    return node_values_[attr][static_cast<size_t>(node) * node_schemas_[attr].storage_dim() + d];
}

void Graph::set_node_value(int attr, int node, double v, int d) {
    node_values_[attr][static_cast<size_t>(node) * node_schemas_[attr].storage_dim() + d] = v;
}

double Graph::edge_value(int attr, int edge, int d) const {
    return edge_values_[attr][static_cast<size_t>(edge) * edge_schemas_[attr].storage_dim() + d];
}

void Graph::set_edge_value(int attr, int edge, double v, int d) {
    edge_values_[attr][static_cast<size_t>(edge) * edge_schemas_[attr].storage_dim() + d] = v;
}

std::vector<std::vector<int>> Graph::adjacency() const {
    std::vector<std::vector<int>> adj(static_cast<size_t>(num_nodes_));
    for (const auto& [u, v] : edges_) {
        adj[static_cast<size_t>(u)].push_back(v);
        adj[static_cast<size_t>(v)].push_back(u);
    }
    return adj;
}

int Graph::degree(int node) const {
    int d = 0;
    for (const auto& [u, v] : edges_)
        if (u == node || v == node) ++d;
    return d;
}

void Graph::validate() const {
    std::set<std::pair<int, int>> seen;
    for (const auto& [u, v] : edges_) {
        if (u < 0 || u >= num_nodes_ || v < 0 || v >= num_nodes_)
            throw GraphError("edge endpoint out of range");
        if (!directed_ && u > v) throw GraphError("undirected edge not in canonical order");
        if (!seen.insert({u, v}).second)
            throw GraphError("duplicate edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    for (size_t a = 0; a < node_schemas_.size(); ++a) {
        node_schemas_[a].validate();
        if (node_values_[a].size() !=
            static_cast<size_t>(num_nodes_) * node_schemas_[a].storage_dim())
            throw GraphError("node attribute " + node_schemas_[a].name + " row count mismatch");
    }
    for (size_t a = 0; a < edge_schemas_.size(); ++a) {
        edge_schemas_[a].validate();
        if (edge_values_[a].size() !=
            edges_.size() * static_cast<size_t>(edge_schemas_[a].storage_dim()))
            throw GraphError("edge attribute " + edge_schemas_[a].name + " row count mismatch");
    }
}

namespace {

void normalize_table(const std::vector<AttributeSchema>& schemas,
                     std::vector<std::vector<double>>& values, int rows) {
    for (size_t a = 0; a < schemas.size(); ++a) {
        const auto& schema = schemas[a];
        if (schema.kind != AttrKind::Continuous) continue;
        int dim = schema.storage_dim();
        auto& table = values[a];
        if (schema.norm == AttrNorm::MinMax) {
            for (int d = 0; d < dim; ++d) {
                double lo = 0.0, hi = 0.0;
                bool first = true;
                for (int r = 0; r < rows; ++r) {
                    double v = table[static_cast<size_t>(r) * dim + d];
                    if (first) {
                        lo = hi = v;
                        first = false;
                    }
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                double span = hi - lo;
                for (int r = 0; r < rows; ++r) {
                    auto& v = table[static_cast<size_t>(r) * dim + d];
                    v = span > 0.0 ? (v - lo) / span : 0.0;
                }
            }
        } else if (schema.norm == AttrNorm::L1) {
            for (int r = 0; r < rows; ++r) {
                double norm = 0.0;
                for (int d = 0; d < dim; ++d)
                    norm += std::abs(table[static_cast<size_t>(r) * dim + d]);
                if (norm > 0.0)
                    for (int d = 0; d < dim; ++d) table[static_cast<size_t>(r) * dim + d] /= norm;
            }
        }
    }
}

}  // namespace

Graph normalize_features(const Graph& g) {
    Graph out = g;
    std::vector<std::vector<double>> node_tables, edge_tables;
    for (size_t a = 0; a < g.node_schemas().size(); ++a)
        node_tables.push_back(g.node_values(static_cast<int>(a)));
    for (size_t a = 0; a < g.edge_schemas().size(); ++a)
        edge_tables.push_back(g.edge_values(static_cast<int>(a)));
    normalize_table(g.node_schemas(), node_tables, g.num_nodes());
    normalize_table(g.edge_schemas(), edge_tables, g.num_edges());
    for (size_t a = 0; a < node_tables.size(); ++a)
        out.node_values(static_cast<int>(a)) = std::move(node_tables[a]);
    for (size_t a = 0; a < edge_tables.size(); ++a)
        out.edge_values(static_cast<int>(a)) = std::move(edge_tables[a]);
    return out;
}

Graph sparsify_knn(const Graph& g, int k, const std::string& weight_attr) {
    if (k >= g.num_nodes()) return g;
    int attr = g.edge_attr_index(weight_attr);
    if (g.edge_schemas()[attr].kind != AttrKind::Continuous ||
        g.edge_schemas()[attr].storage_dim() != 1)
        throw GraphError("sparsify_knn: weight attribute must be scalar continuous");

    // per node: (weight, neighbor, edge index), k smallest kept
    std::vector<std::vector<std::tuple<double, int, int>>> incident(
        static_cast<size_t>(g.num_nodes()));
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [u, v] = g.edges()[static_cast<size_t>(e)];
        double w = g.edge_value(attr, e);
        incident[static_cast<size_t>(u)].emplace_back(w, v, e);
        incident[static_cast<size_t>(v)].emplace_back(w, u, e);
    }
    std::set<int> keep;
    for (int u = 0; u < g.num_nodes(); ++u) {
        auto& cand = incident[static_cast<size_t>(u)];
        std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
            return std::get<1>(a) < std::get<1>(b);
        });
        for (int i = 0; i < std::min<int>(k, static_cast<int>(cand.size())); ++i)
            keep.insert(std::get<2>(cand[static_cast<size_t>(i)]));
    }

    Graph out(g.num_nodes(), g.directed());
    for (const auto& s : g.node_schemas()) out.add_node_attribute(s);
    for (size_t a = 0; a < g.node_schemas().size(); ++a)
        out.node_values(static_cast<int>(a)) = g.node_values(static_cast<int>(a));
    for (const auto& s : g.edge_schemas()) out.add_edge_attribute(s);
    for (int e = 0; e < g.num_edges(); ++e) {
        if (!keep.count(e)) continue;
        auto [u, v] = g.edges()[static_cast<size_t>(e)];
        int ne = out.add_edge(u, v);
        for (size_t a = 0; a < g.edge_schemas().size(); ++a)
            for (int d = 0; d < g.edge_schemas()[a].storage_dim(); ++d)
                out.set_edge_value(static_cast<int>(a), ne,
                                   g.edge_value(static_cast<int>(a), e, d), d);
    }
    return out;
}

namespace {

int table_dim(const std::vector<AttributeSchema>& schemas) {
    int d = 0;
    for (const auto& s : schemas) d += s.encoded_dim();
    return d;
}

ad::Tensor feature_matrix(const std::vector<AttributeSchema>& schemas,
                          const std::vector<std::vector<double>>& values, int rows) {
    int dim = table_dim(schemas);
    std::vector<double> out(static_cast<size_t>(rows) * dim, 0.0);
    int col = 0;
    for (size_t a = 0; a < schemas.size(); ++a) {
        const auto& schema = schemas[a];
        int sd = schema.storage_dim();
        for (int r = 0; r < rows; ++r) {
            if (schema.kind == AttrKind::Categorical) {
                int cls = static_cast<int>(values[a][static_cast<size_t>(r) * sd]);
                if (cls < 0 || cls >= schema.size)
                    throw GraphError("attribute " + schema.name + ": class id " +
                                     std::to_string(cls) + " out of range");
                out[static_cast<size_t>(r) * dim + col + cls] = 1.0;
            } else {
                for (int d = 0; d < sd; ++d)
                    out[static_cast<size_t>(r) * dim + col + d] =
                        values[a][static_cast<size_t>(r) * sd + d];
            }
        }
        col += schema.encoded_dim();
    }
    return ad::Tensor({rows, dim}, std::move(out));
}

}  // namespace

int node_feature_dim(const Graph& g) { return table_dim(g.node_schemas()); }
int edge_feature_dim(const Graph& g) { return table_dim(g.edge_schemas()); }

ad::Tensor node_feature_matrix(const Graph& g) {
    std::vector<std::vector<double>> vals;
    for (size_t a = 0; a < g.node_schemas().size(); ++a)
        vals.push_back(g.node_values(static_cast<int>(a)));
    return feature_matrix(g.node_schemas(), vals, g.num_nodes());
}

ad::Tensor edge_feature_matrix(const Graph& g) {
    std::vector<std::vector<double>> vals;
    for (size_t a = 0; a < g.edge_schemas().size(); ++a)
        vals.push_back(g.edge_values(static_cast<int>(a)));
    return feature_matrix(g.edge_schemas(), vals, g.num_edges());
}

}  // namespace lagco
