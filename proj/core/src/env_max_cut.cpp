#include "lagco/envs.hpp"

namespace lagco {

GraphBundle max_cut_base_bundle(const MaxCutData& d) {
    Graph g(d.num_nodes, false);
    g.add_node_attribute({"partition", AttrKind::Binary, 1, AttrNorm::None});
    g.add_edge_attribute({"weight", AttrKind::Continuous, 1, AttrNorm::MinMax});
    for (size_t e = 0; e < d.edges.size(); ++e) {
        int id = g.add_edge(d.edges[e].first, d.edges[e].second);
        g.set_edge_value(0, id, d.weights[e]);
    }
    GraphBundle bundle;
    bundle[kMainGraph] = std::move(g);
    return bundle;
}

MaxCutEnv::MaxCutEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<MaxCutData>();
    template_graph_ = max_cut_base_bundle(*d_).at(kMainGraph);
    partition_attr_ = template_graph_.node_attr_index("partition");
}

void MaxCutEnv::do_reset() {
    bundle_[kMainGraph] = template_graph_;
    partition_.assign(static_cast<size_t>(d_->num_nodes), 0);
    cut_ = 0.0;
}

double MaxCutEnv::raw_objective() const { return cut_; }

std::vector<ActionDescriptor> MaxCutEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    out.reserve(static_cast<size_t>(d_->num_nodes));
    for (int v = 0; v < d_->num_nodes; ++v)
        out.push_back({{ActionComponent::node(kMainGraph, v)}});
    return out;
}

bool MaxCutEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 1) return false;
    const auto& c = a.components[0];
    return c.kind == ActionComponent::Kind::Node && c.nodes.size() == 1 && c.nodes[0] >= 0 &&
           c.nodes[0] < d_->num_nodes;
}

double MaxCutEnv::apply(const ActionDescriptor& a) {
    int v = a.components[0].nodes[0];
    double delta = 0.0;
    for (size_t e = 0; e < d_->edges.size(); ++e) {
        auto [s, t] = d_->edges[e];
        if (s != v && t != v) continue;
        int other = s == v ? t : s;
        bool same = partition_[static_cast<size_t>(v)] == partition_[static_cast<size_t>(other)];
        delta += same ? d_->weights[e] : -d_->weights[e];
    }
    partition_[static_cast<size_t>(v)] ^= 1;
    cut_ += delta;
    bundle_[kMainGraph].set_node_value(partition_attr_, v,
                                       static_cast<double>(partition_[static_cast<size_t>(v)]));
    return delta / (bounds_.best - bounds_.worst);
}

}  // namespace lagco
