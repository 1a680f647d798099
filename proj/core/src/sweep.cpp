#include "lagco/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lagco/env.hpp"
#include "lagco/rng.hpp"

namespace lagco {

int64_t default_sweeps(EnvKind kind) {
    switch (kind) {
        case EnvKind::Tsp: return 10000;
        case EnvKind::MinVertex: return 10000;
        case EnvKind::MaxCut: return 2000;
        case EnvKind::Placement: return 5000;
        case EnvKind::Ospf: return 2000;
        case EnvKind::Traffic: return 2000;
        case EnvKind::CyberPath: return 0;
    }
    return 0;
}

namespace {

// softmax over |delta| with temperature 1, max-shifted for stability
size_t pick_softmax(Rng& rng, const std::vector<double>& magnitudes) {
    double mx = magnitudes[0];
    for (double m : magnitudes) mx = std::max(mx, m);
    std::vector<double> w(magnitudes.size());
    for (size_t i = 0; i < w.size(); ++i) w[i] = std::exp(magnitudes[i] - mx);
    return rng.pick_weighted(w);
}

// ---- TSP: stochastic 2-opt in both directions ----

struct TwoOptMove {
    int i, j;
    double delta;
};

double tour_delta(const TspData& d, const std::vector<int>& tour, int i, int j) {
    int n = static_cast<int>(tour.size());
    int a = tour[static_cast<size_t>((i - 1 + n) % n)], b = tour[static_cast<size_t>(i)];
    int c = tour[static_cast<size_t>(j)], e = tour[static_cast<size_t>((j + 1) % n)];
    return tsp_distance(d, a, c) + tsp_distance(d, b, e) - tsp_distance(d, a, b) -
           tsp_distance(d, c, e);
}

// Refines a tour toward shorter (direction -1) or longer (direction +1)
// lengths with batched stochastic 2-opt moves, returning the final length.
double refine_tour(const TspData& d, std::vector<int> tour, int direction, Rng& rng,
                   const SweepConfig& cfg, std::vector<int>* out_tour) {
    int n = static_cast<int>(tour.size());
    double len = tsp_tour_length(d, tour);
    int misses = 0;
    int max_steps = 20 * n;
    for (int step = 0; step < max_steps && misses < 3; ++step) {
        std::vector<TwoOptMove> moves;
        std::vector<double> mags;
        for (int b = 0; b < cfg.proposal_batch; ++b) {
            int i = static_cast<int>(rng.uniform_int(0, n - 1));
            int j = static_cast<int>(rng.uniform_int(0, n - 1));
            if (i > j) std::swap(i, j);
            if (i == j || (i == 0 && j == n - 1)) continue;
            double delta = tour_delta(d, tour, i, j);
            if (direction < 0 ? delta < -1e-12 : delta > 1e-12) {
                moves.push_back({i, j, delta});
                mags.push_back(std::abs(delta));
            }
        }
        if (moves.empty()) {
            ++misses;
            continue;
        }
        misses = 0;
        const auto& mv = moves[pick_softmax(rng, mags)];
        std::reverse(tour.begin() + mv.i, tour.begin() + mv.j + 1);
        len += mv.delta;
    }
    if (out_tour) *out_tour = std::move(tour);
    return len;
}

void sweep_tsp(Instance& inst, const SweepConfig& cfg, int64_t sweeps, Rng& rng) {
    auto& d = inst.as<TspData>();
    int n = d.num_cities;
    double best = 0, worst = 0;
    std::vector<int> best_tour, worst_tour;
    bool first = true;
    std::vector<int> base(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) base[static_cast<size_t>(i)] = i;
    for (int64_t s = 0; s < sweeps; ++s) {
        std::vector<int> tour = base;
        rng.shuffle(tour);
        std::vector<int> t_best, t_worst;
        double lo = refine_tour(d, tour, -1, rng, cfg, &t_best);
        double hi = refine_tour(d, tour, +1, rng, cfg, &t_worst);
        if (first || lo < best) {
            best = lo;
            best_tour = t_best;
        }
        if (first || hi > worst) {
            worst = hi;
            worst_tour = t_worst;
        }
        first = false;
    }
    d.best_tour = best_tour;
    d.worst_tour = worst_tour;
    inst.bounds = ScoreBounds{worst, best};
}

// ---- MinVertex: greedy-stochastic cover with pruning ----

void sweep_min_vertex(Instance& inst, const SweepConfig& cfg, int64_t sweeps, Rng& rng) {
    auto& d = inst.as<MinVertexData>();
    int n = d.num_nodes;
    int best_size = n + 1;
    std::vector<int> best_cover;
    for (int64_t s = 0; s < sweeps; ++s) {
        std::vector<uint8_t> covered(d.edges.size(), 0);
        std::vector<uint8_t> selected(static_cast<size_t>(n), 0);
        size_t remaining = d.edges.size();
        std::vector<int> cover;
        while (remaining > 0) {
            // top-k nodes by newly-covered count, ties toward lower id
            std::vector<std::pair<int, int>> gain;  // (count, node)
            for (int v = 0; v < n; ++v) {
                if (selected[static_cast<size_t>(v)]) continue;
                int c = 0;
                for (size_t e = 0; e < d.edges.size(); ++e)
                    if (!covered[e] && (d.edges[e].first == v || d.edges[e].second == v)) ++c;
                if (c > 0) gain.emplace_back(c, v);
            }
            std::stable_sort(gain.begin(), gain.end(), [](const auto& a, const auto& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
            });
            int k = std::min<int>(cfg.top_k, static_cast<int>(gain.size()));
            int v = gain[static_cast<size_t>(rng.uniform_int(0, k - 1))].second;
            selected[static_cast<size_t>(v)] = 1;
            cover.push_back(v);
            for (size_t e = 0; e < d.edges.size(); ++e)
                if (!covered[e] && (d.edges[e].first == v || d.edges[e].second == v)) {
                    covered[e] = 1;
                    --remaining;
                }
        }
        // prune redundant nodes in descending id order
        std::vector<int> pruned = cover;
        std::sort(pruned.begin(), pruned.end(), std::greater<>());
        for (int v : pruned) {
            std::vector<int> without;
            for (int u : cover)
                if (u != v) without.push_back(u);
            if (min_vertex_is_cover(d, without)) cover = std::move(without);
        }
        if (static_cast<int>(cover.size()) < best_size) {
            best_size = static_cast<int>(cover.size());
            best_cover = cover;
        }
    }
    d.best_cover = best_cover;
    inst.bounds = ScoreBounds{static_cast<double>(n), static_cast<double>(best_size)};
}

// ---- MaxCut: stochastic local search over node flips ----

void sweep_max_cut(Instance& inst, int64_t sweeps, Rng& rng) {
    auto& d = inst.as<MaxCutData>();
    int n = d.num_nodes;
    double best = 0.0;
    std::vector<int> best_partition(static_cast<size_t>(n), 0);
    for (int64_t s = 0; s < sweeps; ++s) {
        std::vector<int> part(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) part[static_cast<size_t>(v)] = rng.bernoulli(0.5) ? 1 : 0;
        double cut = max_cut_value(d, part);
        for (int iter = 0; iter < 50 * n; ++iter) {
            std::vector<int> nodes;
            std::vector<double> gains;
            for (int v = 0; v < n; ++v) {
                double g = 0.0;
                for (size_t e = 0; e < d.edges.size(); ++e) {
                    auto [a, b] = d.edges[e];
                    if (a != v && b != v) continue;
                    int other = a == v ? b : a;
                    g += part[static_cast<size_t>(v)] == part[static_cast<size_t>(other)]
                             ? d.weights[e]
                             : -d.weights[e];
                }
                if (g > 1e-12) {
                    nodes.push_back(v);
                    gains.push_back(g);
                }
            }
            if (nodes.empty()) break;
            size_t pick = rng.pick_weighted(gains);
            part[static_cast<size_t>(nodes[pick])] ^= 1;
            cut += gains[pick];
        }
        if (cut > best) {
            best = cut;
            best_partition = part;
        }
    }
    d.best_partition = best_partition;
    inst.bounds = ScoreBounds{0.0, best};
}

// ---- Placement: pack/spread construction plus stochastic reassignment ----

std::vector<int> construct_allocation(const PlacementData& d, Rng& rng, bool pack) {
    std::vector<int> order(static_cast<size_t>(d.n_vms));
    for (int i = 0; i < d.n_vms; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        double fa = 0, fb = 0;
        for (int r = 0; r < 4; ++r) {
            fa += d.vms[static_cast<size_t>(a)].demand[r] / d.pms[0].capacity[r];
            fb += d.vms[static_cast<size_t>(b)].demand[r] / d.pms[0].capacity[r];
        }
        return fa > fb;
    });
    std::vector<std::array<double, 4>> used(static_cast<size_t>(d.n_pms), {0, 0, 0, 0});
    std::vector<int> alloc(static_cast<size_t>(d.n_vms), -1);
    for (int vm : order) {
        std::vector<std::pair<double, int>> cand;  // (mean utilization, pm)
        for (int pm = 0; pm < d.n_pms; ++pm) {
            bool fits = true;
            double mean_util = 0.0;
            for (int r = 0; r < 4; ++r) {
                double u = used[static_cast<size_t>(pm)][r] + d.vms[static_cast<size_t>(vm)].demand[r];
                if (u > d.pms[static_cast<size_t>(pm)].capacity[r]) fits = false;
                mean_util += u / d.pms[static_cast<size_t>(pm)].capacity[r];
            }
            if (fits) cand.emplace_back(mean_util / 4.0, pm);
        }
        if (cand.empty()) return {};
        std::stable_sort(cand.begin(), cand.end(), [&](const auto& a, const auto& b) {
            return pack ? a.first > b.first : a.first < b.first;
        });
        int k = std::min<int>(3, static_cast<int>(cand.size()));
        int pm = cand[static_cast<size_t>(rng.uniform_int(0, k - 1))].second;
        alloc[static_cast<size_t>(vm)] = pm;
        for (int r = 0; r < 4; ++r)
            used[static_cast<size_t>(pm)][r] += d.vms[static_cast<size_t>(vm)].demand[r];
    }
    return alloc;
}

void refine_allocation(const PlacementData& d, std::vector<int>& alloc, double& value,
                       int direction, Rng& rng, const SweepConfig& cfg) {
    std::vector<std::array<double, 4>> used(static_cast<size_t>(d.n_pms), {0, 0, 0, 0});
    for (int vm = 0; vm < d.n_vms; ++vm)
        for (int r = 0; r < 4; ++r)
            used[static_cast<size_t>(alloc[static_cast<size_t>(vm)])][r] +=
                d.vms[static_cast<size_t>(vm)].demand[r];
    for (int step = 0; step < cfg.steps_per_sweep; ++step) {
        int vm = static_cast<int>(rng.uniform_int(0, d.n_vms - 1));
        int pm = static_cast<int>(rng.uniform_int(0, d.n_pms - 1));
        int old = alloc[static_cast<size_t>(vm)];
        if (pm == old) continue;
        bool fits = true;
        for (int r = 0; r < 4; ++r)
            if (used[static_cast<size_t>(pm)][r] + d.vms[static_cast<size_t>(vm)].demand[r] >
                d.pms[static_cast<size_t>(pm)].capacity[r])
                fits = false;
        if (!fits) continue;
        alloc[static_cast<size_t>(vm)] = pm;
        double v2 = placement_objective(d, alloc);
        if (direction > 0 ? v2 > value : v2 < value) {
            value = v2;
            for (int r = 0; r < 4; ++r) {
                used[static_cast<size_t>(old)][r] -= d.vms[static_cast<size_t>(vm)].demand[r];
                used[static_cast<size_t>(pm)][r] += d.vms[static_cast<size_t>(vm)].demand[r];
            }
        } else {
            alloc[static_cast<size_t>(vm)] = old;
        }
    }
}

void sweep_placement(Instance& inst, const SweepConfig& cfg, int64_t sweeps, Rng& rng) {
    auto& d = inst.as<PlacementData>();
    double best = 0, worst = 0;
    std::vector<int> best_alloc, worst_alloc;
    bool first = true;
    for (int64_t s = 0; s < sweeps; ++s) {
        bool pack = rng.bernoulli(0.5);
        std::vector<int> alloc = construct_allocation(d, rng, pack);
        if (alloc.empty()) continue;
        double value = placement_objective(d, alloc);

        std::vector<int> hi_alloc = alloc;
        double hi = value;
        refine_allocation(d, hi_alloc, hi, +1, rng, cfg);
        std::vector<int> lo_alloc = alloc;
        double lo = value;
        refine_allocation(d, lo_alloc, lo, -1, rng, cfg);

        if (first || hi > best) {
            best = hi;
            best_alloc = hi_alloc;
        }
        if (first || lo < worst) {
            worst = lo;
            worst_alloc = lo_alloc;
        }
        first = false;
    }
    if (first) throw std::runtime_error("placement sweep found no feasible allocation");
    d.best_alloc = best_alloc;
    d.worst_alloc = worst_alloc;
    inst.bounds = ScoreBounds{worst, best};
}

// ---- OSPF / Traffic: elite-pool stochastic search ----

template <class Solution>
struct ElitePool {
    // keeps the `cap` top solutions for its direction
    int cap;
    bool maximize;
    std::vector<std::pair<double, Solution>> entries;

    void offer(double value, const Solution& sol) {
        entries.emplace_back(value, sol);
        std::stable_sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
            return maximize ? a.first > b.first : a.first < b.first;
        });
        if (static_cast<int>(entries.size()) > cap) entries.resize(static_cast<size_t>(cap));
    }
    const Solution& sample(Rng& rng) const {
        return entries[static_cast<size_t>(
                           rng.uniform_int(0, static_cast<int64_t>(entries.size()) - 1))]
            .second;
    }
};

void sweep_ospf(Instance& inst, const SweepConfig& cfg, int64_t sweeps, Rng& rng) {
    auto& d = inst.as<OspfData>();
    size_t ne = d.edges.size();
    auto random_weights = [&] {
        std::vector<int> w(ne);
        for (auto& x : w) x = static_cast<int>(rng.uniform_int(d.min_weight, d.max_weight));
        return w;
    };
    auto perturb = [&](std::vector<int> w) {
        int count = std::max(1, static_cast<int>(std::lround(cfg.mutate_frac * ne)));
        for (int i = 0; i < count; ++i)
            w[static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(ne) - 1))] =
                static_cast<int>(rng.uniform_int(d.min_weight, d.max_weight));
        return w;
    };
    ElitePool<std::vector<int>> best_pool{cfg.elite_pool, false, {}};
    ElitePool<std::vector<int>> worst_pool{cfg.elite_pool, true, {}};
    double best = 0, worst = 0;
    std::vector<int> best_w, worst_w;
    bool first = true;
    for (int64_t s = 0; s < sweeps; ++s) {
        for (int direction : {-1, +1}) {
            auto& pool = direction < 0 ? best_pool : worst_pool;
            std::vector<int> w = (!pool.entries.empty() && rng.bernoulli(1.0 - cfg.restart_prob))
                                     ? perturb(pool.sample(rng))
                                     : random_weights();
            double v = ospf_max_utilization(d, w);
            for (int step = 0; step < cfg.steps_per_sweep; ++step) {
                auto cand = perturb(w);
                double cv = ospf_max_utilization(d, cand);
                if (direction < 0 ? cv < v : cv > v) {
                    w = std::move(cand);
                    v = cv;
                }
            }
            pool.offer(v, w);
            if (direction < 0 && (first || v < best)) {
                best = v;
                best_w = w;
            }
            if (direction > 0 && (first || v > worst)) {
                worst = v;
                worst_w = w;
            }
        }
        first = false;
    }
    d.best_weights = best_w;
    d.worst_weights = worst_w;
    inst.bounds = ScoreBounds{worst, best};
}

void sweep_traffic(Instance& inst, const SweepConfig& cfg, int64_t sweeps, Rng& rng) {
    auto& d = inst.as<TrafficData>();
    auto paths = traffic_candidate_paths(d);
    size_t nd = d.demands.size();
    auto random_assign = [&]() -> std::vector<int> {
        // up to a few tries for a feasible random draw, else empty
        for (int attempt = 0; attempt < 5; ++attempt) {
            std::vector<int> a(nd);
            for (size_t i = 0; i < nd; ++i)
                a[i] = static_cast<int>(
                    rng.uniform_int(0, static_cast<int64_t>(paths[i].size()) - 1));
            if (traffic_assignment_feasible(d, paths, a)) return a;
        }
        return {};
    };
    auto perturb = [&](std::vector<int> a) {
        int count = std::max(1, static_cast<int>(std::lround(cfg.mutate_frac * nd)));
        for (int i = 0; i < count; ++i) {
            size_t idx = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(nd) - 1));
            int old = a[idx];
            a[idx] = static_cast<int>(
                rng.uniform_int(0, static_cast<int64_t>(paths[idx].size()) - 1));
            if (!traffic_assignment_feasible(d, paths, a)) a[idx] = old;
        }
        return a;
    };
    ElitePool<std::vector<int>> best_pool{cfg.elite_pool, false, {}};
    ElitePool<std::vector<int>> worst_pool{cfg.elite_pool, true, {}};
    double best = 0, worst = 0;
    std::vector<int> best_a, worst_a;
    bool first = true;
    for (int64_t s = 0; s < sweeps; ++s) {
        for (int direction : {-1, +1}) {
            auto& pool = direction < 0 ? best_pool : worst_pool;
            std::vector<int> a;
            if (!pool.entries.empty() && rng.bernoulli(1.0 - cfg.restart_prob))
                a = perturb(pool.sample(rng));
            else
                a = random_assign();
            if (a.empty()) {
                if (pool.entries.empty()) continue;
                a = perturb(pool.sample(rng));
            }
            double v = traffic_max_utilization(d, paths, a);
            for (int step = 0; step < cfg.steps_per_sweep; ++step) {
                auto cand = perturb(a);
                double cv = traffic_max_utilization(d, paths, cand);
                if (direction < 0 ? cv < v : cv > v) {
                    a = std::move(cand);
                    v = cv;
                }
            }
            pool.offer(v, a);
            if (direction < 0 && (first || v < best)) {
                best = v;
                best_a = a;
            }
            if (direction > 0 && (first || v > worst)) {
                worst = v;
                worst_a = a;
            }
        }
        if (!best_a.empty() && !worst_a.empty()) first = false;
    }
    if (best_a.empty() || worst_a.empty()) {
        // fall back to the generator's guaranteed-feasible greedy assignment
        std::vector<int> greedy(nd, 0);
        if (!traffic_assignment_feasible(d, paths, greedy))
            throw std::runtime_error("traffic sweep found no feasible assignment");
        double v = traffic_max_utilization(d, paths, greedy);
        best_a = worst_a = greedy;
        best = worst = v;
    }
    d.best_assign = best_a;
    d.worst_assign = worst_a;
    inst.bounds = ScoreBounds{worst, best};
}

}  // namespace

void sweep_bounds(Instance& instance, const SweepConfig& cfg) {
    int64_t sweeps = cfg.sweeps >= 0 ? cfg.sweeps : default_sweeps(instance.kind);
    Rng rng(cfg.seed);
    switch (instance.kind) {
        case EnvKind::Tsp: sweep_tsp(instance, cfg, sweeps, rng); break;
        case EnvKind::MinVertex: sweep_min_vertex(instance, cfg, sweeps, rng); break;
        case EnvKind::MaxCut: sweep_max_cut(instance, sweeps, rng); break;
        case EnvKind::Placement: sweep_placement(instance, cfg, sweeps, rng); break;
        case EnvKind::Ospf: sweep_ospf(instance, cfg, sweeps, rng); break;
        case EnvKind::Traffic: sweep_traffic(instance, cfg, sweeps, rng); break;
        case EnvKind::CyberPath:
            // bounds already inferred from the node count at generation
            if (!instance.bounds)
                instance.bounds =
                    ScoreBounds{1.0, static_cast<double>(instance.as<CyberData>().n_nodes)};
            break;
    }
    instance.sweep_meta = SweepMeta{sweeps, cfg.seed};
    if (instance.bounds && instance.bounds->span() < 1e-9)
        throw std::runtime_error("degenerate bounds for instance " + instance.id +
                                 ": best equals worst");
}

}  // namespace lagco
