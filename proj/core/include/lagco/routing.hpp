#pragma once

#include <vector>

#include "lagco/instance.hpp"

namespace lagco {

// Shortest-path distances from `source` over an undirected weighted edge list.
std::vector<double> dijkstra(int num_nodes, const std::vector<NetEdge>& edges,
                             const std::vector<double>& weights, int source);

// Routes every demand on shortest paths under the given per-edge weights and
// returns the per-edge load. With ECMP, flow splits equally across equal-cost
// next hops; otherwise the next hop with the smallest (distance, node id)
// pair is used.
std::vector<double> route_demands(int num_nodes, const std::vector<NetEdge>& edges,
                                  const std::vector<double>& weights,
                                  const std::vector<TrafficDemand>& demands, bool ecmp);

}  // namespace lagco
