#include "lagco/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "lagco/env.hpp"
#include "lagco/graph.hpp"
#include "lagco/parallel.hpp"
#include "lagco/rng.hpp"

namespace lagco {

namespace {

std::string make_id(EnvKind kind, int index) {
    std::ostringstream os;
    os << to_string(kind) << '_';
    if (index < 1000) os << (index < 100 ? (index < 10 ? "00" : "0") : "");
    os << index;
    return os.str();
}

// ---- TSP ----

TspData sample_tsp(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    TspData d;
    d.num_cities = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 100));
    d.max_coord = rng.uniform(100.0, 1000.0);
    params["num_cities"] = d.num_cities;
    params["max_coord"] = d.max_coord;
    for (int i = 0; i < d.num_cities; ++i)
        d.coords.push_back({rng.uniform(0.0, d.max_coord), rng.uniform(0.0, d.max_coord)});
    return d;
}

// ---- MinVertex ----

MinVertexData sample_min_vertex(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    for (;;) {
        MinVertexData d;
        d.num_nodes = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 50));
        d.edge_prob = rng.uniform(0.1, 0.4);
        for (int i = 0; i < d.num_nodes; ++i)
            for (int j = i + 1; j < d.num_nodes; ++j)
                if (rng.bernoulli(d.edge_prob)) d.edges.emplace_back(i, j);
        if (d.edges.empty()) continue;  // degenerate instance, redraw
        params["num_nodes"] = d.num_nodes;
        params["edge_prob"] = d.edge_prob;
        return d;
    }
}

// ---- MaxCut ----

MaxCutData sample_max_cut(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    MaxCutData d;
    d.num_nodes = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 100));
    d.max_weight = rng.uniform(10.0, 100.0);
    params["num_nodes"] = d.num_nodes;
    params["max_weight"] = d.max_weight;
    // weights across every pair, then K-NN sparsification like the env graphs
    Graph g(d.num_nodes, false);
    g.add_edge_attribute({"weight", AttrKind::Continuous, 1, AttrNorm::None});
    for (int i = 0; i < d.num_nodes; ++i)
        for (int j = i + 1; j < d.num_nodes; ++j) {
            int e = g.add_edge(i, j);
            g.set_edge_value(0, e, rng.uniform(1.0, d.max_weight));
        }
    Graph s = sparsify_knn(g, 10, "weight");
    for (int e = 0; e < s.num_edges(); ++e) {
        d.edges.push_back(s.edges()[static_cast<size_t>(e)]);
        d.weights.push_back(s.edge_value(0, e));
    }
    return d;
}

// ---- Placement ----

PlacementData sample_placement(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    for (;;) {
        PlacementData d;
        d.n_vms = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 50));
        d.n_pms = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 50));
        d.n_tenants = static_cast<int>(rng.uniform_int(2, 5));

        double vuln_lo = rng.uniform(0.01, 0.1), vuln_hi = rng.uniform(0.2, 1.0);
        double escape_lo = rng.uniform(0.01, 0.1), escape_hi = rng.uniform(0.2, 0.33);
        double cap_mem_lo = rng.uniform(32, 64), cap_mem_hi = rng.uniform(128, 512);
        double dem_mem_lo = rng.uniform(1, 8), dem_mem_hi = rng.uniform(16, 24);
        double cap_sto_lo = rng.uniform(100, 500), cap_sto_hi = rng.uniform(1000, 5000);
        double dem_sto_lo = rng.uniform(10, 50), dem_sto_hi = rng.uniform(60, 100);
        double cap_pe_lo = rng.uniform(8, 16), cap_pe_hi = rng.uniform(32, 128);
        double dem_pe_lo = rng.uniform(2, 4), dem_pe_hi = rng.uniform(8, 16);
        double cap_mips_lo = rng.uniform(1000, 5000), cap_mips_hi = rng.uniform(10000, 50000);
        double dem_mips_lo = rng.uniform(100, 500), dem_mips_hi = rng.uniform(750, 1000);
        double lat_lo = rng.uniform(0.1, 1.0), lat_hi = rng.uniform(2.0, 8.0);
        params["n_vms"] = d.n_vms;
        params["n_pms"] = d.n_pms;
        params["n_tenants"] = d.n_tenants;
        params["vm_demand_memory_min"] = dem_mem_lo;
        params["vm_demand_memory_max"] = dem_mem_hi;
        params["pm_capacity_memory_min"] = cap_mem_lo;
        params["pm_capacity_memory_max"] = cap_mem_hi;

        for (int i = 0; i < d.n_vms; ++i) {
            PlacementData::Vm vm;
            vm.demand = {rng.uniform(dem_mem_lo, dem_mem_hi), rng.uniform(dem_sto_lo, dem_sto_hi),
                         rng.uniform(dem_pe_lo, dem_pe_hi), rng.uniform(dem_mips_lo, dem_mips_hi)};
            vm.vuln_prob = rng.uniform(vuln_lo, vuln_hi);
            vm.tenant = static_cast<int>(rng.uniform_int(0, d.n_tenants - 1));
            d.vms.push_back(vm);
        }
        for (int i = 0; i < d.n_pms; ++i) {
            PlacementData::Pm pm;
            pm.capacity = {rng.uniform(cap_mem_lo, cap_mem_hi), rng.uniform(cap_sto_lo, cap_sto_hi),
                           rng.uniform(cap_pe_lo, cap_pe_hi), rng.uniform(cap_mips_lo, cap_mips_hi)};
            pm.escape_prob = rng.uniform(escape_lo, escape_hi);
            pm.p_idle = rng.uniform(50, 100);
            pm.p_peak = rng.uniform(150, 300);
            d.pms.push_back(pm);
        }
        for (int i = 0; i < d.n_vms; ++i)
            for (int j = i + 1; j < d.n_vms; ++j)
                if (rng.bernoulli(0.8)) d.traffic.emplace_back(i, j, rng.uniform(1.0, 10.0));
        d.latency.assign(static_cast<size_t>(d.n_pms) * d.n_pms, 0.0);
        for (int a = 0; a < d.n_pms; ++a)
            for (int b = a + 1; b < d.n_pms; ++b) {
                double lat = rng.uniform(lat_lo, lat_hi);
                d.latency[static_cast<size_t>(a) * d.n_pms + b] = lat;
                d.latency[static_cast<size_t>(b) * d.n_pms + a] = lat;
            }

        // a feasible allocation must exist: first-fit decreasing by footprint
        std::vector<int> order(static_cast<size_t>(d.n_vms));
        for (int i = 0; i < d.n_vms; ++i) order[static_cast<size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            double fa = 0, fb = 0;
            for (int r = 0; r < 4; ++r) {
                fa += d.vms[static_cast<size_t>(a)].demand[r];
                fb += d.vms[static_cast<size_t>(b)].demand[r];
            }
            return fa > fb;
        });
        std::vector<std::array<double, 4>> used(static_cast<size_t>(d.n_pms), {0, 0, 0, 0});
        std::vector<int> alloc(static_cast<size_t>(d.n_vms), -1);
        bool ok = true;
        for (int vm : order) {
            int placed = -1;
            for (int pm = 0; pm < d.n_pms && placed < 0; ++pm) {
                bool fits = true;
                for (int r = 0; r < 4; ++r)
                    if (used[static_cast<size_t>(pm)][r] + d.vms[static_cast<size_t>(vm)].demand[r] >
                        d.pms[static_cast<size_t>(pm)].capacity[r])
                        fits = false;
                if (fits) placed = pm;
            }
            if (placed < 0) {
                ok = false;
                break;
            }
            alloc[static_cast<size_t>(vm)] = placed;
            for (int r = 0; r < 4; ++r)
                used[static_cast<size_t>(placed)][r] += d.vms[static_cast<size_t>(vm)].demand[r];
        }
        if (!ok) continue;  // infeasible draw, resample
        return d;
    }
}

// ---- network topologies (OSPF / Traffic) ----

std::vector<NetEdge> spanning_graph(Rng& rng, int n, double edge_ratio, double cap_lo,
                                    double cap_hi) {
    std::vector<NetEdge> edges;
    std::set<std::pair<int, int>> present;
    // random spanning tree: attach each node to a random earlier one
    std::vector<int> order(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);
    for (int i = 1; i < n; ++i) {
        int a = order[static_cast<size_t>(i)];
        int b = order[static_cast<size_t>(rng.uniform_int(0, i - 1))];
        int u = std::min(a, b), v = std::max(a, b);
        present.insert({u, v});
        edges.push_back({u, v, rng.uniform(cap_lo, cap_hi)});
    }
    // extra edges on top of the tree so weight changes can re-route traffic
    int extra = std::max(1, static_cast<int>(std::lround(edge_ratio * n * (n - 1) / 2.0)));
    int64_t possible = static_cast<int64_t>(n) * (n - 1) / 2 - (n - 1);
    extra = static_cast<int>(std::min<int64_t>(extra, possible));
    int guard = 0;
    while (extra > 0 && guard < 100000) {
        ++guard;
        int u = static_cast<int>(rng.uniform_int(0, n - 1));
        int v = static_cast<int>(rng.uniform_int(0, n - 1));
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        if (!present.insert({u, v}).second) continue;
        edges.push_back({u, v, rng.uniform(cap_lo, cap_hi)});
        --extra;
    }
    return edges;
}

std::vector<TrafficDemand> sample_demands(Rng& rng, int n, double ratio, double max_traffic,
                                          const std::set<std::pair<int, int>>& eligible) {
    std::vector<std::pair<int, int>> pool;
    for (int s = 0; s < n; ++s)
        for (int t = 0; t < n; ++t)
            if (s != t && (eligible.empty() || eligible.count({s, t}))) pool.emplace_back(s, t);
    int want = std::max(1, static_cast<int>(std::lround(ratio * n * (n - 1))));
    want = std::min<int>(want, static_cast<int>(pool.size()));
    rng.shuffle(pool);
    std::vector<std::pair<int, int>> chosen(pool.begin(), pool.begin() + want);
    std::sort(chosen.begin(), chosen.end());
    std::vector<TrafficDemand> demands;
    for (auto [s, t] : chosen) demands.push_back({s, t, rng.uniform(1.0, max_traffic)});
    return demands;
}

OspfData sample_ospf(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    OspfData d;
    d.num_nodes = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 30));
    double edge_ratio = rng.uniform(0.1, 0.3);
    double traffic_ratio = rng.uniform(0.1, 0.3);
    double cap_lo = rng.uniform(10, 100), cap_hi = rng.uniform(500, 1000);
    double max_traffic = rng.uniform(25, 50);
    d.min_weight = 1;
    d.max_weight = 5;
    d.ecmp = false;
    d.edges = spanning_graph(rng, d.num_nodes, edge_ratio, cap_lo, cap_hi);
    d.demands = sample_demands(rng, d.num_nodes, traffic_ratio, max_traffic, {});
    params["num_nodes"] = d.num_nodes;
    params["communication_edge_ratio"] = edge_ratio;
    params["non_zero_traffic_ratio"] = traffic_ratio;
    params["min_capacity"] = cap_lo;
    params["max_capacity"] = cap_hi;
    params["max_traffic"] = max_traffic;
    return d;
}

TrafficData sample_traffic(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    for (;;) {
        TrafficData d;
        d.num_nodes = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 25));
        double edge_ratio = rng.uniform(0.1, 0.2);
        double traffic_ratio = rng.uniform(0.1, 0.2);
        double cap_lo = rng.uniform(10, 100), cap_hi = rng.uniform(500, 1000);
        double max_traffic = rng.uniform(25, 50);
        d.max_path_len = 4;
        d.edges = spanning_graph(rng, d.num_nodes, edge_ratio, cap_lo, cap_hi);

        // demands restricted to pairs that admit a path within max_path_len
        std::set<std::pair<int, int>> eligible;
        {
            std::vector<std::vector<int>> adj(static_cast<size_t>(d.num_nodes));
            for (const auto& e : d.edges) {
                adj[static_cast<size_t>(e.u)].push_back(e.v);
                adj[static_cast<size_t>(e.v)].push_back(e.u);
            }
            for (int s = 0; s < d.num_nodes; ++s) {
                // BFS depth-limited reachability
                std::vector<int> depth(static_cast<size_t>(d.num_nodes), -1);
                depth[static_cast<size_t>(s)] = 0;
                std::vector<int> frontier{s};
                for (int hop = 0; hop < d.max_path_len && !frontier.empty(); ++hop) {
                    std::vector<int> next;
                    for (int v : frontier)
                        for (int u : adj[static_cast<size_t>(v)])
                            if (depth[static_cast<size_t>(u)] < 0) {
                                depth[static_cast<size_t>(u)] = hop + 1;
                                next.push_back(u);
                            }
                    frontier = std::move(next);
                }
                for (int t = 0; t < d.num_nodes; ++t)
                    if (t != s && depth[static_cast<size_t>(t)] > 0) eligible.insert({s, t});
            }
        }
        if (eligible.empty()) continue;
        d.demands = sample_demands(rng, d.num_nodes, traffic_ratio, max_traffic, eligible);

        // a feasible assignment must exist: greedy min-max-utilization
        auto paths = traffic_candidate_paths(d);
        std::vector<int> assign(d.demands.size(), -1);
        std::vector<double> load(d.edges.size(), 0.0);
        std::vector<size_t> order(d.demands.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return d.demands[a].volume > d.demands[b].volume;
        });
        auto edge_of = [&](int a, int b) -> size_t {
            for (size_t e = 0; e < d.edges.size(); ++e)
                if ((d.edges[e].u == a && d.edges[e].v == b) ||
                    (d.edges[e].u == b && d.edges[e].v == a))
                    return e;
            return d.edges.size();
        };
        bool ok = true;
        for (size_t i : order) {
            int best_path = -1;
            double best_util = 0.0;
            for (size_t p = 0; p < paths[i].size(); ++p) {
                const auto& nodes = paths[i][p];
                bool fits = true;
                double worst = 0.0;
                for (size_t h = 0; h + 1 < nodes.size() && fits; ++h) {
                    size_t e = edge_of(nodes[h], nodes[h + 1]);
                    double util = (load[e] + d.demands[i].volume) / d.edges[e].capacity;
                    if (load[e] + d.demands[i].volume > d.edges[e].capacity) fits = false;
                    worst = std::max(worst, util);
                }
                if (fits && (best_path < 0 || worst < best_util)) {
                    best_path = static_cast<int>(p);
                    best_util = worst;
                }
            }
            if (best_path < 0) {
                ok = false;
                break;
            }
            assign[i] = best_path;
            const auto& nodes = paths[i][static_cast<size_t>(best_path)];
            for (size_t h = 0; h + 1 < nodes.size(); ++h)
                load[edge_of(nodes[h], nodes[h + 1])] += d.demands[i].volume;
        }
        if (!ok) continue;
        params["num_nodes"] = d.num_nodes;
        params["communication_edge_ratio"] = edge_ratio;
        params["non_zero_traffic_ratio"] = traffic_ratio;
        params["min_capacity"] = cap_lo;
        params["max_capacity"] = cap_hi;
        params["max_traffic"] = max_traffic;
        params["max_path_len"] = d.max_path_len;
        return d;
    }
}

// ---- CyberPath ----

const char* kServices[] = {"ssh", "http", "smtp", "ftp", "sql", "rdp", "smb", "dns", "ldap", "nfs"};
const char* kFlaws[] = {"buffer-overflow", "auth-bypass",   "priv-esc",
                        "sql-injection",   "path-traversal", "use-after-free",
                        "race-condition",  "default-creds",  "xxe",
                        "deserialization"};

CyberData::Vuln sample_vuln(Rng& rng) {
    CyberData::Vuln v;
    std::ostringstream os;
    os << kServices[rng.uniform_int(0, 9)] << ' ' << kFlaws[rng.uniform_int(0, 9)] << " cve-"
       << rng.uniform_int(1000, 9999);
    v.text = os.str();
    v.outcome = rng.bernoulli(0.8) ? 0 : 1;  // mostly credential access, some DoS
    return v;
}

CyberData sample_cyber(Rng& rng, std::map<std::string, double>& params, int forced_size) {
    CyberData d;
    d.n_nodes = forced_size > 0 ? forced_size : static_cast<int>(rng.uniform_int(10, 20));
    d.vulns_per_node = 5;
    double overlap = rng.uniform(0.0, 0.1);
    d.p_data_present = rng.uniform(0.6, 0.9);
    d.p_feature_visible = rng.uniform(0.5, 0.7);
    d.p_recon = rng.uniform(0.2, 0.4);
    d.p_detection = rng.uniform(0.05, 0.2);
    params["n_nodes"] = d.n_nodes;
    params["n_vulns_per_node"] = d.vulns_per_node;
    params["vulns_overlap"] = overlap;
    params["p_data_present"] = d.p_data_present;
    params["p_feature_visible"] = d.p_feature_visible;
    params["p_recon"] = d.p_recon;
    params["p_detection"] = d.p_detection;
    std::vector<CyberData::Vuln> pool;
    for (int v = 0; v < d.n_nodes; ++v) {
        std::vector<CyberData::Vuln> vulns;
        for (int k = 0; k < d.vulns_per_node; ++k) {
            if (!pool.empty() && rng.bernoulli(overlap))
                vulns.push_back(pool[static_cast<size_t>(
                    rng.uniform_int(0, static_cast<int64_t>(pool.size()) - 1))]);
            else {
                vulns.push_back(sample_vuln(rng));
                pool.push_back(vulns.back());
            }
        }
        d.vulns.push_back(std::move(vulns));
        d.data_present.push_back(rng.bernoulli(d.p_data_present) ? 1 : 0);
    }
    return d;
}

}  // namespace

Instance generate_scenario_with_size(EnvKind kind, int size, int index, uint64_t master_seed) {
    Instance inst;
    inst.kind = kind;
    inst.id = make_id(kind, index);
    inst.seed = child_seed(master_seed, static_cast<uint64_t>(index));
    Rng rng(inst.seed);
    switch (kind) {
        case EnvKind::Tsp: inst.data = sample_tsp(rng, inst.params, size); break;
        case EnvKind::MinVertex: inst.data = sample_min_vertex(rng, inst.params, size); break;
        case EnvKind::MaxCut: inst.data = sample_max_cut(rng, inst.params, size); break;
        case EnvKind::Placement: inst.data = sample_placement(rng, inst.params, size); break;
        case EnvKind::CyberPath: {
            auto d = sample_cyber(rng, inst.params, size);
            // bounds inferred from the node count: worst one owned node, best all
            inst.bounds = ScoreBounds{1.0, static_cast<double>(d.n_nodes)};
            inst.data = std::move(d);
            break;
        }
        case EnvKind::Ospf: inst.data = sample_ospf(rng, inst.params, size); break;
        case EnvKind::Traffic: inst.data = sample_traffic(rng, inst.params, size); break;
    }
    return inst;
}

Instance generate_scenario(EnvKind kind, int index, uint64_t master_seed) {
    return generate_scenario_with_size(kind, 0, index, master_seed);
}

std::vector<Instance> generate_scenarios(EnvKind kind, int count, uint64_t master_seed, int jobs) {
    std::vector<Instance> out(static_cast<size_t>(count));
    parallel_for(static_cast<size_t>(count), jobs, [&](size_t i) {
        out[i] = generate_scenario(kind, static_cast<int>(i), master_seed);
    });
    return out;
}

}  // namespace lagco
