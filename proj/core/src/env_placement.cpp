#include <algorithm>

#include "lagco/envs.hpp"

namespace lagco {

namespace {

constexpr int kEtypeAlloc = 0;
constexpr int kEtypeTraffic = 1;
constexpr int kEtypeLatency = 2;

}  // namespace

GraphBundle placement_base_bundle(const PlacementData& d, const std::vector<int>& alloc) {
    int n = d.n_vms + d.n_pms;
    Graph g(n, false);
    g.add_node_attribute({"is_vm", AttrKind::Binary, 1, AttrNorm::None});
    g.add_node_attribute({"demand", AttrKind::Continuous, 4, AttrNorm::MinMax});
    g.add_node_attribute({"capacity", AttrKind::Continuous, 4, AttrNorm::MinMax});
    g.add_node_attribute({"util", AttrKind::Continuous, 4, AttrNorm::MinMax});
    g.add_node_attribute({"power", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_node_attribute({"tenant", AttrKind::Continuous, 1, AttrNorm::MinMax});
    g.add_edge_attribute({"etype", AttrKind::Categorical, 3, AttrNorm::None});
    g.add_edge_attribute({"value", AttrKind::Continuous, 1, AttrNorm::MinMax});

    std::vector<std::array<double, 4>> used(static_cast<size_t>(d.n_pms), {0, 0, 0, 0});
    std::vector<int> count(static_cast<size_t>(d.n_pms), 0);
    bool allocated = !alloc.empty() && alloc[0] >= 0;
    if (allocated)
        for (int vm = 0; vm < d.n_vms; ++vm) {
            for (int r = 0; r < 4; ++r)
                used[static_cast<size_t>(alloc[static_cast<size_t>(vm)])][r] +=
                    d.vms[static_cast<size_t>(vm)].demand[r];
            ++count[static_cast<size_t>(alloc[static_cast<size_t>(vm)])];
        }

    for (int vm = 0; vm < d.n_vms; ++vm) {
        g.set_node_value(0, vm, 1.0);
        for (int r = 0; r < 4; ++r) g.set_node_value(1, vm, d.vms[static_cast<size_t>(vm)].demand[r], r);
        g.set_node_value(5, vm, static_cast<double>(d.vms[static_cast<size_t>(vm)].tenant));
    }
    for (int pm = 0; pm < d.n_pms; ++pm) {
        int node = d.n_vms + pm;
        const auto& p = d.pms[static_cast<size_t>(pm)];
        for (int r = 0; r < 4; ++r) {
            g.set_node_value(2, node, p.capacity[r], r);
            g.set_node_value(3, node, used[static_cast<size_t>(pm)][r] / p.capacity[r], r);
        }
        double power = count[static_cast<size_t>(pm)] > 0
                           ? p.p_idle + (p.p_peak - p.p_idle) * used[static_cast<size_t>(pm)][2] /
                                            p.capacity[2]
                           : 0.0;
        g.set_node_value(4, node, power);
    }

    if (allocated)
        for (int vm = 0; vm < d.n_vms; ++vm) {
            int e = g.add_edge(vm, d.n_vms + alloc[static_cast<size_t>(vm)]);
            g.set_edge_value(0, e, kEtypeAlloc);
            g.set_edge_value(1, e, 1.0);
        }
    for (const auto& [a, b, vol] : d.traffic) {
        int e = g.add_edge(a, b);
        g.set_edge_value(0, e, kEtypeTraffic);
        g.set_edge_value(1, e, vol);
    }
    for (int a = 0; a < d.n_pms; ++a)
        for (int b = a + 1; b < d.n_pms; ++b) {
            int e = g.add_edge(d.n_vms + a, d.n_vms + b);
            g.set_edge_value(0, e, kEtypeLatency);
            g.set_edge_value(1, e, d.latency[static_cast<size_t>(a) * d.n_pms + b]);
        }

    GraphBundle bundle;
    bundle[kMainGraph] = std::move(g);
    return bundle;
}

PlacementEnv::PlacementEnv(const Instance& instance, const EnvConfig& cfg) : Env(instance, cfg) {
    d_ = &instance_.as<PlacementData>();
    if (d_->worst_alloc.empty())
        throw EnvError("placement instance " + instance_.id +
                       " has no worst allocation; run the sweep stage first");
}

void PlacementEnv::do_reset() {
    alloc_ = d_->worst_alloc;
    used_.assign(static_cast<size_t>(d_->n_pms), {0, 0, 0, 0});
    for (int vm = 0; vm < d_->n_vms; ++vm)
        for (int r = 0; r < 4; ++r)
            used_[static_cast<size_t>(alloc_[static_cast<size_t>(vm)])][r] +=
                d_->vms[static_cast<size_t>(vm)].demand[r];
    objective_ = placement_objective(*d_, alloc_);
    rebuild_graph();
}

void PlacementEnv::rebuild_graph() { bundle_ = placement_base_bundle(*d_, alloc_); }

double PlacementEnv::raw_objective() const { return objective_; }

bool PlacementEnv::fits(int vm, int pm) const {
    // migrations only: staying put is not an action
    if (pm == alloc_[static_cast<size_t>(vm)]) return false;
    for (int r = 0; r < 4; ++r)
        if (used_[static_cast<size_t>(pm)][r] + d_->vms[static_cast<size_t>(vm)].demand[r] >
            d_->pms[static_cast<size_t>(pm)].capacity[r] + 1e-9)
            return false;
    return true;
}

std::vector<ActionDescriptor> PlacementEnv::do_valid_actions() const {
    std::vector<ActionDescriptor> out;
    for (int vm = 0; vm < d_->n_vms; ++vm)
        for (int pm = 0; pm < d_->n_pms; ++pm)
            if (fits(vm, pm))
                out.push_back({{ActionComponent::node(kMainGraph, vm),
                                ActionComponent::node(kMainGraph, d_->n_vms + pm)}});
    return out;
}

bool PlacementEnv::do_is_valid(const ActionDescriptor& a) const {
    if (a.components.size() != 2) return false;
    const auto& src = a.components[0];
    const auto& dst = a.components[1];
    if (src.kind != ActionComponent::Kind::Node || dst.kind != ActionComponent::Kind::Node)
        return false;
    if (src.nodes.size() != 1 || dst.nodes.size() != 1) return false;
    int vm = src.nodes[0];
    int pm_node = dst.nodes[0];
    if (vm < 0 || vm >= d_->n_vms) return false;
    if (pm_node < d_->n_vms || pm_node >= d_->n_vms + d_->n_pms) return false;
    return fits(vm, pm_node - d_->n_vms);
}

double PlacementEnv::apply(const ActionDescriptor& a) {
    int vm = a.components[0].nodes[0];
    int pm = a.components[1].nodes[0] - d_->n_vms;
    int old = alloc_[static_cast<size_t>(vm)];
    double before = bounds_.normalize(objective_);
    double migration = 0.0;
    if (pm != old) {
        for (int r = 0; r < 4; ++r) {
            used_[static_cast<size_t>(old)][r] -= d_->vms[static_cast<size_t>(vm)].demand[r];
            used_[static_cast<size_t>(pm)][r] += d_->vms[static_cast<size_t>(vm)].demand[r];
        }
        alloc_[static_cast<size_t>(vm)] = pm;
        objective_ = placement_objective(*d_, alloc_);
        rebuild_graph();
        // migration penalty scales with the moved VM's relative footprint
        double footprint = 0.0;
        for (int r = 0; r < 4; ++r) {
            double max_demand = 0.0;
            for (const auto& v : d_->vms) max_demand = std::max(max_demand, v.demand[r]);
            if (max_demand > 0.0)
                footprint += d_->vms[static_cast<size_t>(vm)].demand[r] / max_demand;
        }
        migration = cfg_.placement_migration_coeff * footprint / 4.0;
    }
    return bounds_.normalize(objective_) - before - migration;
}

}  // namespace lagco
