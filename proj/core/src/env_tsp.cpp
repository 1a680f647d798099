#include <algorithm>
#include <cmath>

#include "lagco/envs.hpp"

namespace lagco {

GraphBundle tsp_base_bundle(const TspData& d) {
    Graph g(d.num_cities, false);
    g.add_node_attribute({"visited", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"pos", AttrKind::Continuous, 2, AttrNorm::MinMax});
    g.add_edge_attribute({"dist", AttrKind::Continuous, 1, AttrNorm::MinMax});
    for (int i = 0; i < d.num_cities; ++i) {
        g.set_node_value(1, i, d.coords[static_cast<size_t>(i)][0], 0);
        g.set_node_value(1, i, d.coords[static_cast<size_t>(i)][1], 1);
    }
    for (int i = 0; i < d.num_cities; ++i)
        for (int j = i + 1; j < d.num_cities; ++j) {
            int e = g.add_edge(i, j);
            g.set_edge_value(0, e, tsp_distance(d, i, j));
        }
    GraphBundle bundle;
    bundle[kMainGraph] = sparsify_knn(g, kSparsifyNeighbors, "dist");
    return bundle;
}

TspEnv::TspEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<TspData>();
    template_graph_ = tsp_base_bundle(*d_).at(kMainGraph);
    visited_attr_ = template_graph_.node_attr_index("visited");
}

void TspEnv::do_reset() {
    bundle_[kMainGraph] = template_graph_;
    visited_.assign(static_cast<size_t>(d_->num_cities), 0);
    tour_.clear();
    int start = static_cast<int>(rng_.uniform_int(0, d_->num_cities - 1));
    visited_[static_cast<size_t>(start)] = 1;
    tour_.push_back(start);
    bundle_[kMainGraph].set_node_value(visited_attr_, start, 1.0);
    estimate_ = padding_estimate();
}

double TspEnv::padding_estimate() const {
    // partial tour length, then pessimistic completion: repeatedly append the
    // city farthest from the current last one, finally close the loop
    double len = 0.0;
    for (size_t i = 0; i + 1 < tour_.size(); ++i) len += tsp_distance(*d_, tour_[i], tour_[i + 1]);
    std::vector<uint8_t> left = visited_;
    int cur = tour_.back();
    int remaining = 0;
    for (uint8_t v : left) remaining += v ? 0 : 1;
    while (remaining > 0) {
        int far = -1;
        double far_d = -1.0;
        for (int u = 0; u < d_->num_cities; ++u) {
            if (left[static_cast<size_t>(u)]) continue;
            double dist = tsp_distance(*d_, cur, u);
            if (dist > far_d) {
                far_d = dist;
                far = u;
            }
        }
        len += far_d;
        left[static_cast<size_t>(far)] = 1;
        cur = far;
        --remaining;
    }
    len += tsp_distance(*d_, cur, tour_.front());
    return len;
}

double TspEnv::raw_objective() const { return estimate_; }

bool TspEnv::solution_complete() const {
    return static_cast<int>(tour_.size()) == d_->num_cities;
}

bool TspEnv::naturally_done() const { return solution_complete(); }

std::vector<ActionDescriptor> TspEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    for (int v = 0; v < d_->num_cities; ++v)
        if (!visited_[static_cast<size_t>(v)])
            out.push_back({{ActionComponent::node(kMainGraph, v)}});
    return out;
}

bool TspEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 1) return false;
    const auto& c = a.components[0];
    if (c.kind != ActionComponent::Kind::Node || c.nodes.size() != 1) return false;
    int v = c.nodes[0];
    return v >= 0 && v < d_->num_cities && !visited_[static_cast<size_t>(v)];
}

double TspEnv::apply(const ActionDescriptor& a) {
    int v = a.components[0].nodes[0];
    visited_[static_cast<size_t>(v)] = 1;
    tour_.push_back(v);
    bundle_[kMainGraph].set_node_value(visited_attr_, v, 1.0);
    double next = padding_estimate();
    double reward = bounds_.normalize(next) - bounds_.normalize(estimate_);
    estimate_ = next;
    return reward;
}

}  // namespace lagco
