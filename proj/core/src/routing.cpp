#include "lagco/routing.hpp"

#include <algorithm>
#include <limits>
#include <queue>

namespace lagco {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct AdjEntry {
    int neighbor;
    int edge;
};

std::vector<std::vector<AdjEntry>> build_adjacency(int num_nodes,
                                                   const std::vector<NetEdge>& edges) {
    std::vector<std::vector<AdjEntry>> adj(static_cast<size_t>(num_nodes));
    for (size_t e = 0; e < edges.size(); ++e) {
        adj[static_cast<size_t>(edges[e].u)].push_back({edges[e].v, static_cast<int>(e)});
        adj[static_cast<size_t>(edges[e].v)].push_back({edges[e].u, static_cast<int>(e)});
    }
    return adj;
}

}  // namespace

std::vector<double> dijkstra(int num_nodes, const std::vector<NetEdge>& edges,
                             const std::vector<double>& weights, int source) {
    auto adj = build_adjacency(num_nodes, edges);
    std::vector<double> dist(static_cast<size_t>(num_nodes), kInf);
    dist[static_cast<size_t>(source)] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[static_cast<size_t>(v)]) continue;
        for (const auto& [u, e] : adj[static_cast<size_t>(v)]) {
            double nd = d + weights[static_cast<size_t>(e)];
            if (nd < dist[static_cast<size_t>(u)]) {
                dist[static_cast<size_t>(u)] = nd;
                heap.emplace(nd, u);
            }
        }
    }
    return dist;
}

std::vector<double> route_demands(int num_nodes, const std::vector<NetEdge>& edges,
                                  const std::vector<double>& weights,
                                  const std::vector<TrafficDemand>& demands, bool ecmp) {
    std::vector<double> load(edges.size(), 0.0);
    auto adj = build_adjacency(num_nodes, edges);

    // group demands by destination so we run one Dijkstra per sink
    std::vector<std::vector<const TrafficDemand*>> by_dst(static_cast<size_t>(num_nodes));
    for (const auto& d : demands) by_dst[static_cast<size_t>(d.dst)].push_back(&d);

    for (int dst = 0; dst < num_nodes; ++dst) {
        const auto& group = by_dst[static_cast<size_t>(dst)];
        if (group.empty()) continue;
        auto dist = dijkstra(num_nodes, edges, weights, dst);

        if (!ecmp) {
            for (const auto* d : group) {
                int v = d->src;
                if (dist[static_cast<size_t>(v)] == kInf) continue;  // unroutable
                while (v != dst) {
                    int best_u = -1, best_e = -1;
                    double best_d = kInf;
                    for (const auto& [u, e] : adj[static_cast<size_t>(v)]) {
                        if (dist[static_cast<size_t>(v)] !=
                            weights[static_cast<size_t>(e)] + dist[static_cast<size_t>(u)])
                            continue;
                        if (dist[static_cast<size_t>(u)] < best_d ||
                            (dist[static_cast<size_t>(u)] == best_d && u < best_u)) {
                            best_d = dist[static_cast<size_t>(u)];
                            best_u = u;
                            best_e = e;
                        }
                    }
                    load[static_cast<size_t>(best_e)] += d->volume;
                    v = best_u;
                }
            }
            continue;
        }

        // ECMP: push flow through the shortest-path DAG, splitting equally at
        // each node; nodes processed in decreasing distance order so all flow
        // has arrived before a node forwards.
        std::vector<double> flow(static_cast<size_t>(num_nodes), 0.0);
        bool any = false;
        for (const auto* d : group) {
            if (dist[static_cast<size_t>(d->src)] == kInf) continue;
            flow[static_cast<size_t>(d->src)] += d->volume;
            any = true;
        }
        if (!any) continue;
        std::vector<int> order(static_cast<size_t>(num_nodes));
        for (int i = 0; i < num_nodes; ++i) order[static_cast<size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return dist[static_cast<size_t>(a)] > dist[static_cast<size_t>(b)];
        });
        for (int v : order) {
            if (v == dst || flow[static_cast<size_t>(v)] <= 0.0) continue;
            if (dist[static_cast<size_t>(v)] == kInf) continue;
            std::vector<std::pair<int, int>> hops;  // (neighbor, edge)
            for (const auto& [u, e] : adj[static_cast<size_t>(v)])
                if (dist[static_cast<size_t>(v)] ==
                    weights[static_cast<size_t>(e)] + dist[static_cast<size_t>(u)])
                    hops.emplace_back(u, e);
            double share = flow[static_cast<size_t>(v)] / static_cast<double>(hops.size());
            for (auto [u, e] : hops) {
                load[static_cast<size_t>(e)] += share;
                flow[static_cast<size_t>(u)] += share;
            }
            flow[static_cast<size_t>(v)] = 0.0;
        }
    }
    return load;
}

}  // namespace lagco
