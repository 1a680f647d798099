#pragma once

#include "lagco/env.hpp"

namespace lagco {

// Graph names used in bundles. Single-graph benchmarks use kMainGraph; the
// networking benchmarks expose separate communication and traffic views and
// the cybersecurity benchmark an attack graph.
inline constexpr const char* kMainGraph = "graph";
inline constexpr const char* kAttackGraph = "attack_G";
inline constexpr const char* kCommGraph = "comm_G";
inline constexpr const char* kTrafficGraph = "traffic_G";

inline constexpr int kSparsifyNeighbors = 10;  // K-NN kept when densifying would hurt the GNN
inline constexpr int kVulnHashDim = 32;

class TspEnv final : public Env {
public:
    TspEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override;
    const std::vector<int>& tour() const { return tour_; }

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    bool naturally_done() const override;
    bool reached_best() const override { return false; }

private:
    double padding_estimate() const;
    const TspData* d_ = nullptr;
    Graph template_graph_;
    std::vector<int> tour_;
    std::vector<uint8_t> visited_;
    double estimate_ = 0.0;
    int visited_attr_ = -1;
};

class MinVertexEnv final : public Env {
public:
    MinVertexEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override;
    const std::vector<int>& cover() const { return cover_; }

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    bool naturally_done() const override;
    bool reached_best() const override { return false; }

private:
    const MinVertexData* d_ = nullptr;
    Graph template_graph_;
    std::vector<uint8_t> selected_;
    std::vector<int> cover_;
    int covered_edges_ = 0;
    int selected_attr_ = -1, covered_attr_ = -1;
};

class MaxCutEnv final : public Env {
public:
    MaxCutEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override { return true; }
    double cut_value() const { return cut_; }
    const std::vector<int>& partition() const { return partition_; }

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    bool naturally_done() const override { return false; }

private:
    const MaxCutData* d_ = nullptr;
    Graph template_graph_;
    std::vector<int> partition_;
    double cut_ = 0.0;
    int partition_attr_ = -1;
};

class PlacementEnv final : public Env {
public:
    PlacementEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override { return true; }
    const std::vector<int>& allocation() const { return alloc_; }

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    // a fully wedged allocation (no feasible migration) ends the episode
    bool naturally_done() const override { return do_valid_actions().empty(); }

private:
    bool fits(int vm, int pm) const;
    void rebuild_graph();
    const PlacementData* d_ = nullptr;
    std::vector<int> alloc_;
    std::vector<std::array<double, 4>> used_;
    double objective_ = 0.0;
};

class CyberPathEnv final : public Env {
public:
    CyberPathEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override { return true; }
    int compromised_count() const;

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    bool naturally_done() const override;
    bool reached_best() const override { return false; }

private:
    void discover_neighbors(int node);
    void rebuild_graph();
    const CyberData* d_ = nullptr;
    std::vector<uint8_t> visible_, compromised_, feature_visible_, dos_, exfiltrated_;
    // executed attack edges: (src, dst) -> vuln indices used
    std::vector<std::tuple<int, int, int>> attack_edges_;
};

class OspfEnv final : public Env {
public:
    OspfEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override { return true; }
    const std::vector<int>& weights() const { return weights_; }
    double max_utilization() const { return max_util_; }

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    bool naturally_done() const override { return false; }

private:
    void recompute();
    const OspfData* d_ = nullptr;
    std::vector<int> weights_;
    std::vector<double> loads_;
    double max_util_ = 0.0;
};

class TrafficEnv final : public Env {
public:
    TrafficEnv(const Instance& instance, const EnvConfig& cfg);
    double raw_objective() const override;
    bool solution_complete() const override { return true; }
    const std::vector<int>& assignment() const { return assign_; }
    const std::vector<std::vector<std::vector<int>>>& candidate_paths() const { return paths_; }
    double max_utilization() const { return max_util_; }

protected:
    void do_reset() override;
    std::vector<ActionDescriptor> do_valid_actions() const override;
    bool do_is_valid(const ActionDescriptor& action) const override;
    double apply(const ActionDescriptor& action) override;
    bool naturally_done() const override { return false; }

private:
    bool move_feasible(int demand, int path) const;
    void apply_loads(int demand, int path, double sign);
    void refresh_graph();
    const TrafficData* d_ = nullptr;
    std::vector<std::vector<std::vector<int>>> paths_;
    std::vector<int> assign_;
    std::vector<double> loads_;
    double max_util_ = 0.0;
};

// Initial graph views per benchmark (before any reset-time randomness).
GraphBundle tsp_base_bundle(const TspData& d);
GraphBundle min_vertex_base_bundle(const MinVertexData& d);
GraphBundle max_cut_base_bundle(const MaxCutData& d);
GraphBundle placement_base_bundle(const PlacementData& d, const std::vector<int>& alloc);
GraphBundle cyber_base_bundle(const CyberData& d);
GraphBundle ospf_base_bundle(const OspfData& d, const std::vector<int>& weights);
GraphBundle traffic_base_bundle(const TrafficData& d,
                                const std::vector<std::vector<std::vector<int>>>& paths,
                                const std::vector<int>& assign);

}  // namespace lagco
