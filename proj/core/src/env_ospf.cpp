#include <algorithm>

#include "lagco/envs.hpp"
#include "lagco/routing.hpp"

namespace lagco {

namespace {

// aggregated in/out traffic volume per node, so the GNN has node features
std::pair<std::vector<double>, std::vector<double>> traffic_by_node(
    int num_nodes, const std::vector<TrafficDemand>& demands) {
    std::vector<double> in(static_cast<size_t>(num_nodes), 0.0);
    std::vector<double> out(static_cast<size_t>(num_nodes), 0.0);
    for (const auto& d : demands) {
        out[static_cast<size_t>(d.src)] += d.volume;
        in[static_cast<size_t>(d.dst)] += d.volume;
    }
    return {in, out};
}

Graph comm_graph(int num_nodes, const std::vector<NetEdge>& edges,
                 const std::vector<TrafficDemand>& demands, bool with_weight) {
    Graph g(num_nodes, false);
    g.add_node_attribute({"in_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_node_attribute({"out_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_edge_attribute({"capacity", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_edge_attribute({"utilization", AttrKind::Continuous, 1, AttrNorm::MinMax});
    if (with_weight) g.add_edge_attribute({"weight", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_edge_attribute({"load", AttrKind::Continuous, 1, AttrNorm::MinMax});
    auto [in, out] = traffic_by_node(num_nodes, demands);
    for (int v = 0; v < num_nodes; ++v) {
        g.set_node_value(0, v, in[static_cast<size_t>(v)]);
        g.set_node_value(1, v, out[static_cast<size_t>(v)]);
    }
    for (const auto& e : edges) {
        int id = g.add_edge(e.u, e.v);
        g.set_edge_value(0, id, e.capacity);
    }
    return g;
}

Graph traffic_graph(int num_nodes, const std::vector<TrafficDemand>& demands) {
    Graph g(num_nodes, true);
    g.add_node_attribute({"in_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_node_attribute({"out_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_edge_attribute({"volume", AttrKind::Continuous, 1, AttrNorm::MinMax});
    auto [in, out] = traffic_by_node(num_nodes, demands);
    for (int v = 0; v < num_nodes; ++v) {
        g.set_node_value(0, v, in[static_cast<size_t>(v)]);
        g.set_node_value(1, v, out[static_cast<size_t>(v)]);
    }
    for (const auto& d : demands) {
        int id = g.add_edge(d.src, d.dst);
        g.set_edge_value(0, id, d.volume);
    }
    return g;
}

}  // namespace

GraphBundle ospf_base_bundle(const OspfData& d, const std::vector<int>& weights) {
    GraphBundle bundle;
    Graph comm = comm_graph(d.num_nodes, d.edges, d.demands, true);
    std::vector<double> w(weights.begin(), weights.end());
    auto load = route_demands(d.num_nodes, d.edges, w, d.demands, d.ecmp);
    int weight_attr = comm.edge_attr_index("weight");
    int util_attr = comm.edge_attr_index("utilization");
    int load_attr = comm.edge_attr_index("load");
    for (size_t e = 0; e < d.edges.size(); ++e) {
        comm.set_edge_value(weight_attr, static_cast<int>(e), static_cast<double>(weights[e]));
        comm.set_edge_value(util_attr, static_cast<int>(e), load[e] / d.edges[e].capacity);
        comm.set_edge_value(load_attr, static_cast<int>(e), load[e]);
    }
    bundle[kCommGraph] = std::move(comm);
    bundle[kTrafficGraph] = traffic_graph(d.num_nodes, d.demands);
    return bundle;
}

OspfEnv::OspfEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<OspfData>();
    if (d_->worst_weights.empty())
        throw EnvError("ospf instance " + instance_.id +
                       " has no worst weight configuration; run the sweep stage first");
}

void OspfEnv::do_reset() {
    weights_ = d_->worst_weights;
    recompute();
}

void OspfEnv::recompute() {
    std::vector<double> w(weights_.begin(), weights_.end());
    loads_ = route_demands(d_->num_nodes, d_->edges, w, d_->demands, d_->ecmp);
    max_util_ = 0.0;
    for (size_t e = 0; e < d_->edges.size(); ++e)
        max_util_ = std::max(max_util_, loads_[e] / d_->edges[e].capacity);
    bundle_ = ospf_base_bundle(*d_, weights_);
}

double OspfEnv::raw_objective() const { return max_util_; }

std::vector<ActionDescriptor> OspfEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    for (size_t e = 0; e < d_->edges.size(); ++e)
        for (int delta = -1; delta <= 1; ++delta) {
            int w = weights_[e] + delta;
            if (w < d_->min_weight || w > d_->max_weight) continue;
            out.push_back({{ActionComponent::edge(kCommGraph, d_->edges[e].u, d_->edges[e].v),
                            ActionComponent::object("", delta + 1)}});
        }
    return out;
}

bool OspfEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 2) return false;
    const auto& edge = a.components[0];
    const auto& opt = a.components[1];
    if (edge.kind != ActionComponent::Kind::Edge || edge.nodes.size() != 2) return false;
    if (opt.kind != ActionComponent::Kind::Object || opt.option < 0 || opt.option > 2) return false;
    for (size_t e = 0; e < d_->edges.size(); ++e) {
        if ((d_->edges[e].u == edge.nodes[0] && d_->edges[e].v == edge.nodes[1]) ||
            (d_->edges[e].u == edge.nodes[1] && d_->edges[e].v == edge.nodes[0])) {
            int w = weights_[e] + (opt.option - 1);
            return w >= d_->min_weight && w <= d_->max_weight;
        }
    }
    return false;
}

double OspfEnv::apply(const ActionDescriptor& a) {
    const auto& edge = a.components[0];
    int delta = a.components[1].option - 1;
    double before = bounds_.normalize(max_util_);
    for (size_t e = 0; e < d_->edges.size(); ++e)
        if ((d_->edges[e].u == edge.nodes[0] && d_->edges[e].v == edge.nodes[1]) ||
            (d_->edges[e].u == edge.nodes[1] && d_->edges[e].v == edge.nodes[0])) {
            weights_[e] += delta;
            break;
        }
    recompute();
    return bounds_.normalize(max_util_) - before;
}

}  // namespace lagco
