#pragma once

#include <string>

#include "lagco/graph.hpp"

namespace lagco {

// JSON graph format with stable key ordering:
// {directed, num_nodes, edges:[[u,v],...],
//  node_attrs:{name:{kind, size, norm, values:[...]}}, edge_attrs:{...}}
std::string graph_to_json(const Graph& g, int indent = -1);
Graph graph_from_json(const std::string& text);

std::string bundle_to_json(const GraphBundle& bundle, int indent = -1);
GraphBundle bundle_from_json(const std::string& text);

}  // namespace lagco
