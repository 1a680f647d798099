#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lagco/tensor.hpp"

namespace lagco {

struct GraphError : std::runtime_error {
    explicit GraphError(const std::string& what) : std::runtime_error(what) {}
};

enum class AttrKind { Binary, Categorical, Continuous };
enum class AttrNorm { None, MinMax, L1 };

std::string to_string(AttrKind kind);
std::string to_string(AttrNorm norm);
AttrKind attr_kind_from_string(const std::string& s);
AttrNorm attr_norm_from_string(const std::string& s);

struct AttributeSchema {
    std::string name;
    AttrKind kind = AttrKind::Continuous;
    // classes for Categorical (>= 2), vector width for Continuous (>= 1), 1 for Binary
    int size = 1;
    AttrNorm norm = AttrNorm::None;

    // columns used to store values: categorical attributes store the class id
    int storage_dim() const { return kind == AttrKind::Categorical ? 1 : size; }
    // columns after encoding for dense feature matrices (one-hot categorical)
    int encoded_dim() const { return size; }
    void validate() const;
};

// Typed attributed graph. Undirected edges are stored in canonical (min,max)
// order; attribute tables are row-major [rows x storage_dim] parallel to the
// schema list.
class Graph {
public:
    Graph() = default;
    Graph(int num_nodes, bool directed) : num_nodes_(num_nodes), directed_(directed) {}

    int num_nodes() const { return num_nodes_; }
    bool directed() const { return directed_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }

    void add_node_attribute(const AttributeSchema& schema);
    void add_edge_attribute(const AttributeSchema& schema);
    const std::vector<AttributeSchema>& node_schemas() const { return node_schemas_; }
    const std::vector<AttributeSchema>& edge_schemas() const { return edge_schemas_; }
    int node_attr_index(const std::string& name) const;
    int edge_attr_index(const std::string& name) const;

    // Appends an edge; returns its index. Undirected edges are canonicalized.
    int add_edge(int u, int v);
    int find_edge(int u, int v) const;  // -1 when absent

    double node_value(int attr, int node, int d = 0) const;
    void set_node_value(int attr, int node, double v, int d = 0);
    double edge_value(int attr, int edge, int d = 0) const;
    void set_edge_value(int attr, int edge, double v, int d = 0);
    const std::vector<double>& node_values(int attr) const { return node_values_[attr]; }
    std::vector<double>& node_values(int attr) { return node_values_[attr]; }
    const std::vector<double>& edge_values(int attr) const { return edge_values_[attr]; }
    std::vector<double>& edge_values(int attr) { return edge_values_[attr]; }

    // neighbor ids over incident edges (both directions)
    std::vector<std::vector<int>> adjacency() const;
    int degree(int node) const;

    void validate() const;

private:
    int num_nodes_ = 0;
    bool directed_ = false;
    std::vector<std::pair<int, int>> edges_;
    std::vector<AttributeSchema> node_schemas_, edge_schemas_;
    std::vector<std::vector<double>> node_values_, edge_values_;
};

using GraphBundle = std::map<std::string, Graph>;

// Min-max scales continuous min-max attributes per column to [0,1]
// (constant columns map to 0) and L1-normalizes l1 attributes per row.
Graph normalize_features(const Graph& g);

// Keeps, per node, the edges to its k nearest neighbors by the scalar
// continuous weight attribute; union of directed selections. Ties break
// toward the lower neighbor index. k >= |V| returns g unchanged.
Graph sparsify_knn(const Graph& g, int k, const std::string& weight_attr);

// Dense [V x d_v] / [E x d_e] matrices with one-hot categorical encoding.
ad::Tensor node_feature_matrix(const Graph& g);
ad::Tensor edge_feature_matrix(const Graph& g);
int node_feature_dim(const Graph& g);
int edge_feature_dim(const Graph& g);

}  // namespace lagco
