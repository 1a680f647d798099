#include "lagco/envs.hpp"

namespace lagco {

GraphBundle min_vertex_base_bundle(const MinVertexData& d) {
    Graph g(d.num_nodes, false);
    g.add_node_attribute({"selected", AttrKind::Binary, 1, AttrNorm::None});
    g.add_edge_attribute({"covered", AttrKind::Binary, 1, AttrNorm::None});
    for (const auto& [u, v] : d.edges) g.add_edge(u, v);
    GraphBundle bundle;
    bundle[kMainGraph] = std::move(g);
    return bundle;
}

MinVertexEnv::MinVertexEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<MinVertexData>();
    template_graph_ = min_vertex_base_bundle(*d_).at(kMainGraph);
    selected_attr_ = template_graph_.node_attr_index("selected");
    covered_attr_ = template_graph_.edge_attr_index("covered");
}

void MinVertexEnv::do_reset() {
    bundle_[kMainGraph] = template_graph_;
    selected_.assign(static_cast<size_t>(d_->num_nodes), 0);
    cover_.clear();
    covered_edges_ = 0;
}

double MinVertexEnv::raw_objective() const { return static_cast<double>(cover_.size()); }

bool MinVertexEnv::solution_complete() const {
    return covered_edges_ == static_cast<int>(d_->edges.size());
}

bool MinVertexEnv::naturally_done() const { return solution_complete(); }

std::vector<ActionDescriptor> MinVertexEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    for (int v = 0; v < d_->num_nodes; ++v)
        if (!selected_[static_cast<size_t>(v)])
            out.push_back({{ActionComponent::node(kMainGraph, v)}});
    return out;
}

bool MinVertexEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 1) return false;
    const auto& c = a.components[0];
    if (c.kind != ActionComponent::Kind::Node || c.nodes.size() != 1) return false;
    int v = c.nodes[0];
    return v >= 0 && v < d_->num_nodes && !selected_[static_cast<size_t>(v)];
}

double MinVertexEnv::apply(const ActionDescriptor& a) {
    int v = a.components[0].nodes[0];
    selected_[static_cast<size_t>(v)] = 1;
    cover_.push_back(v);
    Graph& g = bundle_[kMainGraph];
    g.set_node_value(selected_attr_, v, 1.0);
    int newly = 0;
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [s, t] = g.edges()[static_cast<size_t>(e)];
        if ((s == v || t == v) && g.edge_value(covered_attr_, e) == 0.0) {
            g.set_edge_value(covered_attr_, e, 1.0);
            ++newly;
        }
    }
    covered_edges_ += newly;
    // newly covered edges against a constant size penalty; the penalty equals
    // the per-node cost in normalized-score units
    double coverage = d_->edges.empty() ? 0.0 : static_cast<double>(newly) / d_->edges.size();
    return coverage - 1.0 / bounds_.span();
}

}  // namespace lagco
