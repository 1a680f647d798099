#include "lagco/env.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "lagco/envs.hpp"
#include "lagco/routing.hpp"

namespace lagco {

double episode_coefficient(EnvKind kind) {
    switch (kind) {
        case EnvKind::MaxCut:
        case EnvKind::Ospf: return 2.0;
        case EnvKind::CyberPath:
        case EnvKind::Traffic: return 3.0;
        default: return 1.0;
    }
}

bool has_hard_constraint(EnvKind kind) {
    return kind == EnvKind::Tsp || kind == EnvKind::MinVertex;
}

Env::Env(const Instance& instance, const EnvConfig& cfg) : instance_(instance), cfg_(cfg) {
    if (!instance_.bounds)
        throw EnvError("instance " + instance_.id +
                       " has no oracle bounds; run the sweep stage first");
    bounds_ = *instance_.bounds;
    cutoff_ = std::max(
        1, static_cast<int>(std::lround(episode_coefficient(kind()) * instance_.scenario_size())));
}

void Env::reset(uint64_t seed) {
    rng_ = Rng(seed);
    t_ = 0;
    done_ = false;
    started_ = true;
    do_reset();
    refresh_done();
}

std::vector<ActionDescriptor> Env::valid_actions() const {
    if (!started_) throw EnvError("valid_actions before reset");
    if (done_) throw EnvError("valid_actions on terminated episode");
    return do_valid_actions();
}

bool Env::is_valid(const ActionDescriptor& action) const {
    if (!started_ || done_) return false;
    return do_is_valid(action);
}

StepResult Env::step(const ActionDescriptor& action) {
    if (!started_) throw EnvError("step before reset");
    if (done_) throw EnvError("step on terminated episode");
    if (!do_is_valid(action)) {
        if (cfg_.strict)
            throw EnvError("invalid action " + action.to_string() + " for " +
                           to_string(kind()) + " instance " + instance_.id);
        // lenient mode: the step is consumed, nothing changes
        ++t_;
        refresh_done();
        return {0.0, done_};
    }
    double reward = apply(action);
    ++t_;
    refresh_done();
    return {reward, done_};
}

double Env::score() const {
    if (!done_) throw EnvError("score on a non-terminal state");
    if (has_hard_constraint(kind()) && !solution_complete()) return 0.0;
    return bounds_.normalize(raw_objective());
}

bool Env::reached_best() const { return bounds_.normalize(raw_objective()) >= 1.0 - 1e-12; }

void Env::refresh_done() {
    done_ = naturally_done() || t_ >= cutoff_ || (cfg_.training && reached_best());
}

std::unique_ptr<Env> make_env(const Instance& instance, const EnvConfig& cfg) {
    switch (instance.kind) {
        case EnvKind::Tsp: return std::make_unique<TspEnv>(instance, cfg);
        case EnvKind::MinVertex: return std::make_unique<MinVertexEnv>(instance, cfg);
        case EnvKind::MaxCut: return std::make_unique<MaxCutEnv>(instance, cfg);
        case EnvKind::Placement: return std::make_unique<PlacementEnv>(instance, cfg);
        case EnvKind::CyberPath: return std::make_unique<CyberPathEnv>(instance, cfg);
        case EnvKind::Ospf: return std::make_unique<OspfEnv>(instance, cfg);
        case EnvKind::Traffic: return std::make_unique<TrafficEnv>(instance, cfg);
    }
    throw EnvError("unknown env kind");
}

GraphBundle build_base_bundle(const Instance& instance) {
    switch (instance.kind) {
        case EnvKind::Tsp: return tsp_base_bundle(instance.as<TspData>());
        case EnvKind::MinVertex: return min_vertex_base_bundle(instance.as<MinVertexData>());
        case EnvKind::MaxCut: return max_cut_base_bundle(instance.as<MaxCutData>());
        case EnvKind::Placement: {
            const auto& d = instance.as<PlacementData>();
            std::vector<int> alloc = d.worst_alloc;
            if (alloc.empty()) alloc.assign(static_cast<size_t>(d.n_vms), -1);
            return placement_base_bundle(d, alloc);
        }
        case EnvKind::CyberPath: return cyber_base_bundle(instance.as<CyberData>());
        case EnvKind::Ospf: {
            const auto& d = instance.as<OspfData>();
            std::vector<int> weights = d.worst_weights;
            if (weights.empty()) weights.assign(d.edges.size(), d.min_weight);
            return ospf_base_bundle(d, weights);
        }
        case EnvKind::Traffic: {
            const auto& d = instance.as<TrafficData>();
            auto paths = traffic_candidate_paths(d);
            std::vector<int> assign = d.worst_assign;
            if (assign.empty()) assign.assign(d.demands.size(), 0);
            return traffic_base_bundle(d, paths, assign);
        }
    }
    throw EnvError("unknown env kind");
}

// ---- shared objective evaluators ----

double tsp_distance(const TspData& d, int a, int b) {
    double dx = d.coords[static_cast<size_t>(a)][0] - d.coords[static_cast<size_t>(b)][0];
    double dy = d.coords[static_cast<size_t>(a)][1] - d.coords[static_cast<size_t>(b)][1];
    return std::sqrt(dx * dx + dy * dy);
}

double tsp_tour_length(const TspData& d, const std::vector<int>& tour) {
    double len = 0.0;
    for (size_t i = 0; i + 1 < tour.size(); ++i) len += tsp_distance(d, tour[i], tour[i + 1]);
    if (tour.size() > 1) len += tsp_distance(d, tour.back(), tour.front());
    return len;
}

bool min_vertex_is_cover(const MinVertexData& d, const std::vector<int>& cover) {
    std::vector<uint8_t> in(static_cast<size_t>(d.num_nodes), 0);
    for (int v : cover) in[static_cast<size_t>(v)] = 1;
    for (const auto& [u, v] : d.edges)
        if (!in[static_cast<size_t>(u)] && !in[static_cast<size_t>(v)]) return false;
    return true;
}

double max_cut_value(const MaxCutData& d, const std::vector<int>& partition) {
    double cut = 0.0;
    for (size_t e = 0; e < d.edges.size(); ++e) {
        auto [u, v] = d.edges[e];
        if (partition[static_cast<size_t>(u)] != partition[static_cast<size_t>(v)])
            cut += d.weights[e];
    }
    return cut;
}

bool placement_alloc_feasible(const PlacementData& d, const std::vector<int>& alloc) {
    std::vector<std::array<double, 4>> used(static_cast<size_t>(d.n_pms), {0, 0, 0, 0});
    for (int vm = 0; vm < d.n_vms; ++vm) {
        int pm = alloc[static_cast<size_t>(vm)];
        if (pm < 0 || pm >= d.n_pms) return false;
        for (int r = 0; r < 4; ++r) used[static_cast<size_t>(pm)][r] += d.vms[static_cast<size_t>(vm)].demand[r];
    }
    for (int pm = 0; pm < d.n_pms; ++pm)
        for (int r = 0; r < 4; ++r)
            if (used[static_cast<size_t>(pm)][r] > d.pms[static_cast<size_t>(pm)].capacity[r] + 1e-9)
                return false;
    return true;
}

double placement_objective(const PlacementData& d, const std::vector<int>& alloc) {
    int n_pms = d.n_pms;
    std::vector<std::array<double, 4>> used(static_cast<size_t>(n_pms), {0, 0, 0, 0});
    std::vector<int> count(static_cast<size_t>(n_pms), 0);
    for (int vm = 0; vm < d.n_vms; ++vm) {
        int pm = alloc[static_cast<size_t>(vm)];
        for (int r = 0; r < 4; ++r)
            used[static_cast<size_t>(pm)][r] += d.vms[static_cast<size_t>(vm)].demand[r];
        ++count[static_cast<size_t>(pm)];
    }
    std::vector<double> mean_util(static_cast<size_t>(n_pms), 0.0);
    for (int pm = 0; pm < n_pms; ++pm) {
        double acc = 0.0;
        for (int r = 0; r < 4; ++r)
            acc += used[static_cast<size_t>(pm)][r] / d.pms[static_cast<size_t>(pm)].capacity[r];
        mean_util[static_cast<size_t>(pm)] = acc / 4.0;
    }

    // 1. utilization of active machines
    double util = 0.0;
    int active = 0;
    for (int pm = 0; pm < n_pms; ++pm)
        if (count[static_cast<size_t>(pm)] > 0) {
            util += mean_util[static_cast<size_t>(pm)];
            ++active;
        }
    util = active > 0 ? util / active : 0.0;

    // 2. energy: linear idle/peak model on the PE utilization, empty PMs off
    double power = 0.0, peak = 0.0;
    for (int pm = 0; pm < n_pms; ++pm) {
        const auto& p = d.pms[static_cast<size_t>(pm)];
        peak += p.p_peak;
        if (count[static_cast<size_t>(pm)] == 0) continue;
        double cpu = used[static_cast<size_t>(pm)][2] / p.capacity[2];
        power += p.p_idle + (p.p_peak - p.p_idle) * cpu;
    }
    double energy = peak > 0.0 ? 1.0 - power / peak : 1.0;

    // 3. packing: fraction of machines left empty
    double packing = n_pms > 0 ? static_cast<double>(n_pms - active) / n_pms : 0.0;

    // 4. balance: spread of mean utilization across all machines
    double mean = 0.0;
    for (double u : mean_util) mean += u;
    mean /= n_pms;
    double var = 0.0;
    for (double u : mean_util) var += (u - mean) * (u - mean);
    double balance = 1.0 - 2.0 * std::sqrt(var / n_pms);

    // 5. security: expected cross-tenant compromise pairs via hypervisor escape
    double risk = 0.0, risk_max = 0.0;
    double max_escape = 0.0;
    for (const auto& p : d.pms) max_escape = std::max(max_escape, p.escape_prob);
    std::vector<std::vector<int>> per_pm(static_cast<size_t>(n_pms));
    for (int vm = 0; vm < d.n_vms; ++vm) per_pm[static_cast<size_t>(alloc[static_cast<size_t>(vm)])].push_back(vm);
    for (int pm = 0; pm < n_pms; ++pm) {
        const auto& vms = per_pm[static_cast<size_t>(pm)];
        double escape = d.pms[static_cast<size_t>(pm)].escape_prob;
        for (int a : vms)
            for (int b : vms)
                if (a != b && d.vms[static_cast<size_t>(a)].tenant != d.vms[static_cast<size_t>(b)].tenant)
                    risk += d.vms[static_cast<size_t>(a)].vuln_prob * escape;
    }
    for (int a = 0; a < d.n_vms; ++a)
        for (int b = 0; b < d.n_vms; ++b)
            if (a != b && d.vms[static_cast<size_t>(a)].tenant != d.vms[static_cast<size_t>(b)].tenant)
                risk_max += d.vms[static_cast<size_t>(a)].vuln_prob * max_escape;
    double security = risk_max > 0.0 ? 1.0 - risk / risk_max : 1.0;

    return util + energy + packing + balance + security;
}

double ospf_max_utilization(const OspfData& d, const std::vector<int>& weights) {
    std::vector<double> w(weights.begin(), weights.end());
    auto load = route_demands(d.num_nodes, d.edges, w, d.demands, d.ecmp);
    double max_util = 0.0;
    for (size_t e = 0; e < d.edges.size(); ++e)
        max_util = std::max(max_util, load[e] / d.edges[e].capacity);
    return max_util;
}

std::vector<std::vector<std::vector<int>>> traffic_candidate_paths(const TrafficData& d) {
    std::vector<std::vector<int>> adj(static_cast<size_t>(d.num_nodes));
    for (const auto& e : d.edges) {
        adj[static_cast<size_t>(e.u)].push_back(e.v);
        adj[static_cast<size_t>(e.v)].push_back(e.u);
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());

    std::vector<std::vector<std::vector<int>>> out;
    out.reserve(d.demands.size());
    for (const auto& demand : d.demands) {
        std::vector<std::vector<int>> paths;
        std::vector<int> current{demand.src};
        std::vector<uint8_t> on_path(static_cast<size_t>(d.num_nodes), 0);
        on_path[static_cast<size_t>(demand.src)] = 1;
        std::function<void(int)> dfs = [&](int v) {
            if (v == demand.dst) {
                paths.push_back(current);
                return;
            }
            if (static_cast<int>(current.size()) - 1 >= d.max_path_len) return;
            for (int u : adj[static_cast<size_t>(v)]) {
                if (on_path[static_cast<size_t>(u)]) continue;
                on_path[static_cast<size_t>(u)] = 1;
                current.push_back(u);
                dfs(u);
                current.pop_back();
                on_path[static_cast<size_t>(u)] = 0;
            }
        };
        dfs(demand.src);
        out.push_back(std::move(paths));
    }
    return out;
}

namespace {

std::vector<double> traffic_loads(const TrafficData& d,
                                  const std::vector<std::vector<std::vector<int>>>& paths,
                                  const std::vector<int>& assign) {
    std::vector<double> load(d.edges.size(), 0.0);
    // edge lookup
    auto edge_index = [&](int u, int v) -> int {
        for (size_t e = 0; e < d.edges.size(); ++e)
            if ((d.edges[e].u == u && d.edges[e].v == v) || (d.edges[e].u == v && d.edges[e].v == u))
                return static_cast<int>(e);
        return -1;
    };
    for (size_t i = 0; i < d.demands.size(); ++i) {
        const auto& path = paths[i][static_cast<size_t>(assign[i])];
        for (size_t h = 0; h + 1 < path.size(); ++h)
            load[static_cast<size_t>(edge_index(path[h], path[h + 1]))] += d.demands[i].volume;
    }
    return load;
}

}  // namespace

bool traffic_assignment_feasible(const TrafficData& d,
                                 const std::vector<std::vector<std::vector<int>>>& paths,
                                 const std::vector<int>& assign) {
    auto load = traffic_loads(d, paths, assign);
    for (size_t e = 0; e < d.edges.size(); ++e)
        if (load[e] > d.edges[e].capacity + 1e-9) return false;
    return true;
}

double traffic_max_utilization(const TrafficData& d,
                               const std::vector<std::vector<std::vector<int>>>& paths,
                               const std::vector<int>& assign) {
    auto load = traffic_loads(d, paths, assign);
    double max_util = 0.0;
    for (size_t e = 0; e < d.edges.size(); ++e)
        max_util = std::max(max_util, load[e] / d.edges[e].capacity);
    return max_util;
}

}  // namespace lagco
