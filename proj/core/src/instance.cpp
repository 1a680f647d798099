#include "lagco/instance.hpp"

#include <fstream>

#include "json.hpp"
#include "lagco/graph_io.hpp"

namespace lagco {

// defined in env.cpp; renders the instance's initial graph views
GraphBundle build_base_bundle(const Instance& instance);

using ordered_json = nlohmann::ordered_json;

std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::Tsp: return "tsp";
        case EnvKind::MinVertex: return "min_vertex";
        case EnvKind::MaxCut: return "max_cut";
        case EnvKind::Placement: return "placement";
        case EnvKind::CyberPath: return "cyber_path";
        case EnvKind::Ospf: return "ospf";
        case EnvKind::Traffic: return "traffic";
    }
    return "?";
}

EnvKind env_kind_from_string(const std::string& s) {
    for (EnvKind k : kAllEnvKinds)
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown env kind: " + s);
}

int Instance::scenario_size() const {
    switch (kind) {
        case EnvKind::Tsp: return as<TspData>().num_cities;
        case EnvKind::MinVertex: return as<MinVertexData>().num_nodes;
        case EnvKind::MaxCut: return as<MaxCutData>().num_nodes;
        case EnvKind::Placement: return as<PlacementData>().n_vms;
        case EnvKind::CyberPath: return as<CyberData>().n_nodes;
        case EnvKind::Ospf: return static_cast<int>(as<OspfData>().edges.size());
        case EnvKind::Traffic: return static_cast<int>(as<TrafficData>().demands.size());
    }
    return 0;
}

namespace {

ordered_json pairs_to_json(const std::vector<std::pair<int, int>>& pairs) {
    ordered_json j = ordered_json::array();
    for (const auto& [a, b] : pairs) j.push_back({a, b});
    return j;
}

std::vector<std::pair<int, int>> pairs_from_json(const ordered_json& j) {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : j) out.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    return out;
}

ordered_json net_edges_to_json(const std::vector<NetEdge>& edges) {
    ordered_json j = ordered_json::array();
    for (const auto& e : edges) j.push_back({e.u, e.v, e.capacity});
    return j;
}

std::vector<NetEdge> net_edges_from_json(const ordered_json& j) {
    std::vector<NetEdge> out;
    for (const auto& e : j) out.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    return out;
}

ordered_json demands_to_json(const std::vector<TrafficDemand>& demands) {
    ordered_json j = ordered_json::array();
    for (const auto& d : demands) j.push_back({d.src, d.dst, d.volume});
    return j;
}

std::vector<TrafficDemand> demands_from_json(const ordered_json& j) {
    std::vector<TrafficDemand> out;
    for (const auto& d : j)
        out.push_back({d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<double>()});
    return out;
}

ordered_json data_to_json(const Instance& inst) {
    ordered_json j;
    switch (inst.kind) {
        case EnvKind::Tsp: {
            const auto& d = inst.as<TspData>();
            j["num_cities"] = d.num_cities;
            j["max_coord"] = d.max_coord;
            ordered_json coords = ordered_json::array();
            for (const auto& c : d.coords) coords.push_back({c[0], c[1]});
            j["coords"] = std::move(coords);
            if (!d.best_tour.empty()) j["best_tour"] = d.best_tour;
            if (!d.worst_tour.empty()) j["worst_tour"] = d.worst_tour;
            break;
        }
        case EnvKind::MinVertex: {
            const auto& d = inst.as<MinVertexData>();
            j["num_nodes"] = d.num_nodes;
            j["edge_prob"] = d.edge_prob;
            j["edges"] = pairs_to_json(d.edges);
            if (!d.best_cover.empty()) j["best_cover"] = d.best_cover;
            break;
        }
        case EnvKind::MaxCut: {
            const auto& d = inst.as<MaxCutData>();
            j["num_nodes"] = d.num_nodes;
            j["max_weight"] = d.max_weight;
            j["edges"] = pairs_to_json(d.edges);
            j["weights"] = d.weights;
            if (!d.best_partition.empty()) j["best_partition"] = d.best_partition;
            break;
        }
        case EnvKind::Placement: {
            const auto& d = inst.as<PlacementData>();
            j["n_vms"] = d.n_vms;
            j["n_pms"] = d.n_pms;
            j["n_tenants"] = d.n_tenants;
            ordered_json vms = ordered_json::array();
            for (const auto& vm : d.vms)
                vms.push_back({{"demand", vm.demand}, {"vuln_prob", vm.vuln_prob}, {"tenant", vm.tenant}});
            j["vms"] = std::move(vms);
            ordered_json pms = ordered_json::array();
            for (const auto& pm : d.pms)
                pms.push_back({{"capacity", pm.capacity},
                               {"escape_prob", pm.escape_prob},
                               {"p_idle", pm.p_idle},
                               {"p_peak", pm.p_peak}});
            j["pms"] = std::move(pms);
            ordered_json traffic = ordered_json::array();
            for (const auto& [a, b, vol] : d.traffic) traffic.push_back({a, b, vol});
            j["traffic"] = std::move(traffic);
            j["latency"] = d.latency;
            if (!d.worst_alloc.empty()) j["worst_alloc"] = d.worst_alloc;
            if (!d.best_alloc.empty()) j["best_alloc"] = d.best_alloc;
            break;
        }
        case EnvKind::CyberPath: {
            const auto& d = inst.as<CyberData>();
            j["n_nodes"] = d.n_nodes;
            j["vulns_per_node"] = d.vulns_per_node;
            j["p_data_present"] = d.p_data_present;
            j["p_feature_visible"] = d.p_feature_visible;
            j["p_recon"] = d.p_recon;
            j["p_detection"] = d.p_detection;
            ordered_json vulns = ordered_json::array();
            for (const auto& node_vulns : d.vulns) {
                ordered_json nv = ordered_json::array();
                for (const auto& v : node_vulns) nv.push_back({{"text", v.text}, {"outcome", v.outcome}});
                vulns.push_back(std::move(nv));
            }
            j["vulns"] = std::move(vulns);
            j["data_present"] = std::vector<int>(d.data_present.begin(), d.data_present.end());
            break;
        }
        case EnvKind::Ospf: {
            const auto& d = inst.as<OspfData>();
            j["num_nodes"] = d.num_nodes;
            j["edges"] = net_edges_to_json(d.edges);
            j["demands"] = demands_to_json(d.demands);
            j["min_weight"] = d.min_weight;
            j["max_weight"] = d.max_weight;
            j["ecmp"] = d.ecmp;
            if (!d.worst_weights.empty()) j["worst_weights"] = d.worst_weights;
            if (!d.best_weights.empty()) j["best_weights"] = d.best_weights;
            break;
        }
        case EnvKind::Traffic: {
            const auto& d = inst.as<TrafficData>();
            j["num_nodes"] = d.num_nodes;
            j["edges"] = net_edges_to_json(d.edges);
            j["demands"] = demands_to_json(d.demands);
            j["max_path_len"] = d.max_path_len;
            if (!d.worst_assign.empty()) j["worst_assign"] = d.worst_assign;
            if (!d.best_assign.empty()) j["best_assign"] = d.best_assign;
            break;
        }
    }
    return j;
}

InstanceData data_from_json(EnvKind kind, const ordered_json& j) {
    switch (kind) {
        case EnvKind::Tsp: {
            TspData d;
            d.num_cities = j.at("num_cities").get<int>();
            d.max_coord = j.at("max_coord").get<double>();
            for (const auto& c : j.at("coords"))
                d.coords.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
            if (j.contains("best_tour")) d.best_tour = j.at("best_tour").get<std::vector<int>>();
            if (j.contains("worst_tour")) d.worst_tour = j.at("worst_tour").get<std::vector<int>>();
            return d;
        }
        case EnvKind::MinVertex: {
            MinVertexData d;
            d.num_nodes = j.at("num_nodes").get<int>();
            d.edge_prob = j.at("edge_prob").get<double>();
            d.edges = pairs_from_json(j.at("edges"));
            if (j.contains("best_cover")) d.best_cover = j.at("best_cover").get<std::vector<int>>();
            return d;
        }
        case EnvKind::MaxCut: {
            MaxCutData d;
            d.num_nodes = j.at("num_nodes").get<int>();
            d.max_weight = j.at("max_weight").get<double>();
            d.edges = pairs_from_json(j.at("edges"));
            d.weights = j.at("weights").get<std::vector<double>>();
            if (j.contains("best_partition"))
                d.best_partition = j.at("best_partition").get<std::vector<int>>();
            return d;
        }
        case EnvKind::Placement: {
            PlacementData d;
            d.n_vms = j.at("n_vms").get<int>();
            d.n_pms = j.at("n_pms").get<int>();
            d.n_tenants = j.at("n_tenants").get<int>();
            for (const auto& vm : j.at("vms")) {
                PlacementData::Vm v;
                v.demand = vm.at("demand").get<std::array<double, 4>>();
                v.vuln_prob = vm.at("vuln_prob").get<double>();
                v.tenant = vm.at("tenant").get<int>();
                d.vms.push_back(v);
            }
            for (const auto& pm : j.at("pms")) {
                PlacementData::Pm p;
                p.capacity = pm.at("capacity").get<std::array<double, 4>>();
                p.escape_prob = pm.at("escape_prob").get<double>();
                p.p_idle = pm.at("p_idle").get<double>();
                p.p_peak = pm.at("p_peak").get<double>();
                d.pms.push_back(p);
            }
            for (const auto& t : j.at("traffic"))
                d.traffic.emplace_back(t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>());
            d.latency = j.at("latency").get<std::vector<double>>();
            if (j.contains("worst_alloc")) d.worst_alloc = j.at("worst_alloc").get<std::vector<int>>();
            if (j.contains("best_alloc")) d.best_alloc = j.at("best_alloc").get<std::vector<int>>();
            return d;
        }
        case EnvKind::CyberPath: {
            CyberData d;
            d.n_nodes = j.at("n_nodes").get<int>();
            d.vulns_per_node = j.at("vulns_per_node").get<int>();
            d.p_data_present = j.at("p_data_present").get<double>();
            d.p_feature_visible = j.at("p_feature_visible").get<double>();
            d.p_recon = j.at("p_recon").get<double>();
            d.p_detection = j.at("p_detection").get<double>();
            for (const auto& nv : j.at("vulns")) {
                std::vector<CyberData::Vuln> vulns;
                for (const auto& v : nv)
                    vulns.push_back({v.at("text").get<std::string>(), v.at("outcome").get<int>()});
                d.vulns.push_back(std::move(vulns));
            }
            for (int x : j.at("data_present").get<std::vector<int>>())
                d.data_present.push_back(static_cast<uint8_t>(x));
            return d;
        }
        case EnvKind::Ospf: {
            OspfData d;
            d.num_nodes = j.at("num_nodes").get<int>();
            d.edges = net_edges_from_json(j.at("edges"));
            d.demands = demands_from_json(j.at("demands"));
            d.min_weight = j.at("min_weight").get<int>();
            d.max_weight = j.at("max_weight").get<int>();
            d.ecmp = j.at("ecmp").get<bool>();
            if (j.contains("worst_weights"))
                d.worst_weights = j.at("worst_weights").get<std::vector<int>>();
            if (j.contains("best_weights"))
                d.best_weights = j.at("best_weights").get<std::vector<int>>();
            return d;
        }
        case EnvKind::Traffic: {
            TrafficData d;
            d.num_nodes = j.at("num_nodes").get<int>();
            d.edges = net_edges_from_json(j.at("edges"));
            d.demands = demands_from_json(j.at("demands"));
            d.max_path_len = j.at("max_path_len").get<int>();
            if (j.contains("worst_assign")) d.worst_assign = j.at("worst_assign").get<std::vector<int>>();
            if (j.contains("best_assign")) d.best_assign = j.at("best_assign").get<std::vector<int>>();
            return d;
        }
    }
    throw std::invalid_argument("unknown env kind");
}

}  // namespace

std::string instance_to_json(const Instance& inst, int indent) {
    ordered_json j;
    j["env"] = to_string(inst.kind);
    j["id"] = inst.id;
    j["seed"] = inst.seed;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : inst.params) params[k] = v;
    j["params"] = std::move(params);
    j["data"] = data_to_json(inst);
    if (inst.bounds) {
        ordered_json b;
        b["worst"] = inst.bounds->worst;
        b["best"] = inst.bounds->best;
        if (inst.sweep_meta) {
            b["sweeps"] = inst.sweep_meta->sweeps;
            b["seed"] = inst.sweep_meta->seed;
        }
        j["bounds"] = std::move(b);
    }
    // derived view of the initial graphs; the canonical content is `data`
    ordered_json graphs = ordered_json::object();
    for (const auto& [name, g] : build_base_bundle(inst))
        graphs[name] = ordered_json::parse(graph_to_json(g));
    j["graphs"] = std::move(graphs);
    return j.dump(indent);
}

Instance instance_from_json(const std::string& text) {
    auto j = ordered_json::parse(text);
    Instance inst;
    inst.kind = env_kind_from_string(j.at("env").get<std::string>());
    inst.id = j.at("id").get<std::string>();
    inst.seed = j.at("seed").get<uint64_t>();
    for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
        inst.params[it.key()] = it.value().get<double>();
    inst.data = data_from_json(inst.kind, j.at("data"));
    if (j.contains("bounds")) {
        ScoreBounds b;
        b.worst = j.at("bounds").at("worst").get<double>();
        b.best = j.at("bounds").at("best").get<double>();
        inst.bounds = b;
        if (j.at("bounds").contains("sweeps")) {
            SweepMeta m;
            m.sweeps = j.at("bounds").at("sweeps").get<int64_t>();
            m.seed = j.at("bounds").at("seed").get<uint64_t>();
            inst.sweep_meta = m;
        }
    }
    return inst;
}

void save_instance(const std::string& path, const Instance& inst) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write instance file " + path);
    os << instance_to_json(inst) << '\n';
}

Instance load_instance(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open instance file " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return instance_from_json(text);
}

}  // namespace lagco
