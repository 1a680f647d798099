#include <algorithm>

#include "lagco/envs.hpp"

namespace lagco {

namespace {

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

}  // namespace

GraphBundle traffic_base_bundle(const TrafficData& d,
                                const std::vector<std::vector<std::vector<int>>>& paths,
                                const std::vector<int>& assign) {
    GraphBundle bundle;
    Graph comm(d.num_nodes, false);
    comm.add_node_attribute({"in_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    comm.add_node_attribute({"out_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    comm.add_edge_attribute({"capacity", AttrKind::Continuous, 1, AttrNorm::MinMax});
    comm.add_edge_attribute({"utilization", AttrKind::Continuous, 1, AttrNorm::MinMax});
    comm.add_edge_attribute({"load", AttrKind::Continuous, 1, AttrNorm::MinMax});
    auto [in, out] = traffic_by_node(d.num_nodes, d.demands);
    for (int v = 0; v < d.num_nodes; ++v) {
        comm.set_node_value(0, v, in[static_cast<size_t>(v)]);
        comm.set_node_value(1, v, out[static_cast<size_t>(v)]);
    }
    for (const auto& e : d.edges) {
        int id = comm.add_edge(e.u, e.v);
        comm.set_edge_value(0, id, e.capacity);
    }
    if (!assign.empty()) {
        for (size_t i = 0; i < d.demands.size(); ++i) {
            const auto& path = paths[i][static_cast<size_t>(assign[i])];
            for (size_t h = 0; h + 1 < path.size(); ++h) {
                int e = comm.find_edge(path[h], path[h + 1]);
                comm.set_edge_value(2, e, comm.edge_value(2, e) + d.demands[i].volume);
            }
        }
        for (int e = 0; e < comm.num_edges(); ++e)
            comm.set_edge_value(1, e, comm.edge_value(2, e) / d.edges[static_cast<size_t>(e)].capacity);
    }
    bundle[kCommGraph] = std::move(comm);

    Graph traffic(d.num_nodes, true);
    traffic.add_node_attribute({"in_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    traffic.add_node_attribute({"out_traffic", AttrKind::Continuous, 1, AttrNorm::MinMax});
    traffic.add_edge_attribute({"volume", AttrKind::Continuous, 1, AttrNorm::MinMax});
    for (int v = 0; v < d.num_nodes; ++v) {
        traffic.set_node_value(0, v, in[static_cast<size_t>(v)]);
        traffic.set_node_value(1, v, out[static_cast<size_t>(v)]);
    }
    for (const auto& dem : d.demands) {
        int id = traffic.add_edge(dem.src, dem.dst);
        traffic.set_edge_value(0, id, dem.volume);
    }
    bundle[kTrafficGraph] = std::move(traffic);
    return bundle;
}

TrafficEnv::TrafficEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<TrafficData>();
    if (d_->worst_assign.empty())
        throw EnvError("traffic instance " + instance_.id +
                       " has no worst assignment; run the sweep stage first");
    paths_ = traffic_candidate_paths(*d_);
    for (size_t i = 0; i < d_->demands.size(); ++i)
        if (paths_[i].empty())
            throw EnvError("traffic instance " + instance_.id + ": demand " + std::to_string(i) +
                           " has no feasible path");
}

void TrafficEnv::do_reset() {
    assign_ = d_->worst_assign;
    loads_.assign(d_->edges.size(), 0.0);
    for (size_t i = 0; i < d_->demands.size(); ++i) apply_loads(static_cast<int>(i), assign_[i], 1.0);
    max_util_ = 0.0;
    for (size_t e = 0; e < d_->edges.size(); ++e)
        max_util_ = std::max(max_util_, loads_[e] / d_->edges[e].capacity);
    refresh_graph();
}

void TrafficEnv::apply_loads(int demand, int path, double sign) {
    const auto& nodes = paths_[static_cast<size_t>(demand)][static_cast<size_t>(path)];
    double vol = d_->demands[static_cast<size_t>(demand)].volume;
    for (size_t h = 0; h + 1 < nodes.size(); ++h) {
        for (size_t e = 0; e < d_->edges.size(); ++e) {
            if ((d_->edges[e].u == nodes[h] && d_->edges[e].v == nodes[h + 1]) ||
                (d_->edges[e].u == nodes[h + 1] && d_->edges[e].v == nodes[h])) {
                loads_[e] += sign * vol;
                break;
            }
        }
    }
}

void TrafficEnv::refresh_graph() {
    bundle_ = traffic_base_bundle(*d_, paths_, assign_);
}

double TrafficEnv::raw_objective() const { return max_util_; }

bool TrafficEnv::move_feasible(int demand, int path) const {
    if (path == assign_[static_cast<size_t>(demand)]) return true;
    // loads after moving this demand must stay within every capacity
    std::vector<double> loads = loads_;
    const auto& cur = paths_[static_cast<size_t>(demand)][static_cast<size_t>(assign_[static_cast<size_t>(demand)])];
    const auto& nxt = paths_[static_cast<size_t>(demand)][static_cast<size_t>(path)];
    double vol = d_->demands[static_cast<size_t>(demand)].volume;
    auto edge_of = [&](int a, int b) -> size_t {
        for (size_t e = 0; e < d_->edges.size(); ++e)
            if ((d_->edges[e].u == a && d_->edges[e].v == b) ||
                (d_->edges[e].u == b && d_->edges[e].v == a))
                return e;
        return d_->edges.size();
    };
    for (size_t h = 0; h + 1 < cur.size(); ++h) loads[edge_of(cur[h], cur[h + 1])] -= vol;
    for (size_t h = 0; h + 1 < nxt.size(); ++h) loads[edge_of(nxt[h], nxt[h + 1])] += vol;
    for (size_t e = 0; e < d_->edges.size(); ++e)
        if (loads[e] > d_->edges[e].capacity + 1e-9) return false;
    return true;
}

std::vector<ActionDescriptor> TrafficEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    for (size_t i = 0; i < d_->demands.size(); ++i) {
        const auto& dem = d_->demands[i];
        for (size_t p = 0; p < paths_[i].size(); ++p) {
            if (!move_feasible(static_cast<int>(i), static_cast<int>(p))) continue;
            out.push_back({{ActionComponent::edge(kTrafficGraph, dem.src, dem.dst),
                            ActionComponent::path(kCommGraph, paths_[i][p])}});
        }
    }
    return out;
}

bool TrafficEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 2) return false;
    const auto& edge = a.components[0];
    const auto& path = a.components[1];
    if (edge.kind != ActionComponent::Kind::Edge || edge.nodes.size() != 2) return false;
    if (path.kind != ActionComponent::Kind::Path || path.nodes.size() < 2) return false;
    for (size_t i = 0; i < d_->demands.size(); ++i) {
        if (d_->demands[i].src != edge.nodes[0] || d_->demands[i].dst != edge.nodes[1]) continue;
        for (size_t p = 0; p < paths_[i].size(); ++p)
            if (paths_[i][p] == path.nodes)
                return move_feasible(static_cast<int>(i), static_cast<int>(p));
        return false;
    }
    return false;
}

double TrafficEnv::apply(const ActionDescriptor& a) {
    const auto& edge = a.components[0];
    const auto& path = a.components[1];
    double before = bounds_.normalize(max_util_);
    for (size_t i = 0; i < d_->demands.size(); ++i) {
        if (d_->demands[i].src != edge.nodes[0] || d_->demands[i].dst != edge.nodes[1]) continue;
        for (size_t p = 0; p < paths_[i].size(); ++p) {
            if (paths_[i][p] != path.nodes) continue;
            apply_loads(static_cast<int>(i), assign_[i], -1.0);
            assign_[i] = static_cast<int>(p);
            apply_loads(static_cast<int>(i), assign_[i], 1.0);
            break;
        }
        break;
    }
    max_util_ = 0.0;
    for (size_t e = 0; e < d_->edges.size(); ++e)
        max_util_ = std::max(max_util_, loads_[e] / d_->edges[e].capacity);
    refresh_graph();
    return bounds_.normalize(max_util_) - before;
}

}  // namespace lagco
