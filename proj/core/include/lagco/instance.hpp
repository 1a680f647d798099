#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace lagco {

enum class EnvKind { Tsp, MinVertex, MaxCut, Placement, CyberPath, Ospf, Traffic };

constexpr std::array<EnvKind, 7> kAllEnvKinds = {
    EnvKind::Tsp,       EnvKind::MinVertex, EnvKind::MaxCut, EnvKind::Placement,
    EnvKind::CyberPath, EnvKind::Ospf,      EnvKind::Traffic};

std::string to_string(EnvKind kind);
EnvKind env_kind_from_string(const std::string& s);

// Empirical score bounds per instance; normalization maps worst -> 0, best -> 1.
struct ScoreBounds {
    double worst = 0.0;
    double best = 1.0;

    double span() const { return best > worst ? best - worst : worst - best; }
    double normalize(double raw) const { return (raw - worst) / (best - worst); }
};

struct SweepMeta {
    int64_t sweeps = 0;
    uint64_t seed = 0;
};

struct TspData {
    int num_cities = 0;
    double max_coord = 0;
    std::vector<std::array<double, 2>> coords;
    std::vector<int> best_tour, worst_tour;
};

struct MinVertexData {
    int num_nodes = 0;
    double edge_prob = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> best_cover;
};

struct MaxCutData {
    int num_nodes = 0;
    double max_weight = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> weights;
    std::vector<int> best_partition;
};

struct PlacementData {
    struct Vm {
        std::array<double, 4> demand{};  // memory, storage, pe, mips
        double vuln_prob = 0;
        int tenant = 0;
    };
    struct Pm {
        std::array<double, 4> capacity{};
        double escape_prob = 0;
        double p_idle = 0, p_peak = 0;
    };
    int n_vms = 0, n_pms = 0, n_tenants = 0;
    std::vector<Vm> vms;
    std::vector<Pm> pms;
    std::vector<std::tuple<int, int, double>> traffic;  // (vm, vm, volume)
    std::vector<double> latency;                        // dense n_pms x n_pms, row-major
    std::vector<int> worst_alloc, best_alloc;           // vm -> pm
};

struct CyberData {
    struct Vuln {
        std::string text;
        int outcome = 0;  // 0: credential access, 1: denial of service
    };
    int n_nodes = 0;
    int vulns_per_node = 5;
    double p_data_present = 0, p_feature_visible = 0, p_recon = 0, p_detection = 0;
    std::vector<std::vector<Vuln>> vulns;  // per node
    std::vector<uint8_t> data_present;     // per node, drawn at generation
};

struct NetEdge {
    int u = 0, v = 0;
    double capacity = 0;
};

struct TrafficDemand {
    int src = 0, dst = 0;
    double volume = 0;
};

struct OspfData {
    int num_nodes = 0;
    std::vector<NetEdge> edges;
    std::vector<TrafficDemand> demands;
    int min_weight = 1, max_weight = 5;
    bool ecmp = false;
    std::vector<int> worst_weights, best_weights;
};

struct TrafficData {
    int num_nodes = 0;
    std::vector<NetEdge> edges;
    std::vector<TrafficDemand> demands;
    int max_path_len = 4;
    std::vector<int> worst_assign, best_assign;  // demand -> candidate path index
};

using InstanceData = std::variant<TspData, MinVertexData, MaxCutData, PlacementData, CyberData,
                                  OspfData, TrafficData>;

struct Instance {
    EnvKind kind = EnvKind::Tsp;
    std::string id;
    uint64_t seed = 0;
    std::map<std::string, double> params;  // sampled generation parameters
    InstanceData data;
    std::optional<ScoreBounds> bounds;
    std::optional<SweepMeta> sweep_meta;

    // number of decision variables; also the size-ordering key of the protocol
    int scenario_size() const;

    template <class T>
    const T& as() const {
        return std::get<T>(data);
    }
    template <class T>
    T& as() {
        return std::get<T>(data);
    }
};

std::string instance_to_json(const Instance& inst, int indent = -1);
Instance instance_from_json(const std::string& text);
void save_instance(const std::string& path, const Instance& inst);
Instance load_instance(const std::string& path);

}  // namespace lagco
