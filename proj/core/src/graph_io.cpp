#include "lagco/graph_io.hpp"

#include "json.hpp"

namespace lagco {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json attr_table_to_json(const std::vector<AttributeSchema>& schemas,
                                const Graph& g, bool node_table) {
    ordered_json out = ordered_json::object();
    for (size_t a = 0; a < schemas.size(); ++a) {
        const auto& s = schemas[a];
        ordered_json entry;
        entry["kind"] = to_string(s.kind);
        entry["size"] = s.size;
        entry["norm"] = to_string(s.norm);
        entry["values"] =
            node_table ? g.node_values(static_cast<int>(a)) : g.edge_values(static_cast<int>(a));
        out[s.name] = std::move(entry);
    }
    return out;
}

void attr_table_from_json(const ordered_json& j, Graph& g, bool node_table) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        AttributeSchema s;
        s.name = it.key();
        s.kind = attr_kind_from_string(it.value().at("kind").get<std::string>());
        s.size = it.value().at("size").get<int>();
        s.norm = attr_norm_from_string(it.value().at("norm").get<std::string>());
        auto values = it.value().at("values").get<std::vector<double>>();
        if (node_table) {
            g.add_node_attribute(s);
            g.node_values(g.node_attr_index(s.name)) = std::move(values);
        } else {
            g.add_edge_attribute(s);
            g.edge_values(g.edge_attr_index(s.name)) = std::move(values);
        }
    }
}

ordered_json graph_to_ordered(const Graph& g) {
    ordered_json j;
    j["directed"] = g.directed();
    j["num_nodes"] = g.num_nodes();
    ordered_json edges = ordered_json::array();
    for (const auto& [u, v] : g.edges()) edges.push_back({u, v});
    j["edges"] = std::move(edges);
    j["node_attrs"] = attr_table_to_json(g.node_schemas(), g, true);
    j["edge_attrs"] = attr_table_to_json(g.edge_schemas(), g, false);
    return j;
}

Graph graph_from_ordered(const ordered_json& j) {
    Graph g(j.at("num_nodes").get<int>(), j.at("directed").get<bool>());
    for (const auto& e : j.at("edges")) g.add_edge(e.at(0).get<int>(), e.at(1).get<int>());
    attr_table_from_json(j.at("node_attrs"), g, true);
    attr_table_from_json(j.at("edge_attrs"), g, false);
    g.validate();
    return g;
}

}  // namespace

std::string graph_to_json(const Graph& g, int indent) {
    return graph_to_ordered(g).dump(indent);
}

Graph graph_from_json(const std::string& text) {
    return graph_from_ordered(ordered_json::parse(text));
}

std::string bundle_to_json(const GraphBundle& bundle, int indent) {
    ordered_json j = ordered_json::object();
    for (const auto& [name, g] : bundle) j[name] = graph_to_ordered(g);
    return j.dump(indent);
}

GraphBundle bundle_from_json(const std::string& text) {
    GraphBundle out;
    auto j = ordered_json::parse(text);
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = graph_from_ordered(it.value());
    return out;
}

}  // namespace lagco
