#include "lagco/actions.hpp"

#include <sstream>

#include "json.hpp"

namespace lagco {

ActionComponent ActionComponent::node(std::string graph, int id) {
    ActionComponent c;
    c.kind = Kind::Node;
    c.graph = std::move(graph);
    c.nodes = {id};
    return c;
}

ActionComponent ActionComponent::edge(std::string graph, int u, int v) {
    ActionComponent c;
    c.kind = Kind::Edge;
    c.graph = std::move(graph);
    c.nodes = {u, v};
    return c;
}

ActionComponent ActionComponent::path(std::string graph, std::vector<int> nodes) {
    ActionComponent c;
    c.kind = Kind::Path;
    c.graph = std::move(graph);
    c.nodes = std::move(nodes);
    return c;
}

ActionComponent ActionComponent::object(std::string text, int option) {
    ActionComponent c;
    c.kind = Kind::Object;
    c.text = std::move(text);
    c.option = option;
    return c;
}

namespace {

const char* kind_name(ActionComponent::Kind k) {
    switch (k) {
        case ActionComponent::Kind::Node: return "node";
        case ActionComponent::Kind::Edge: return "edge";
        case ActionComponent::Kind::Path: return "path";
        case ActionComponent::Kind::Object: return "object";
    }
    return "?";
}

ActionComponent::Kind kind_from_name(const std::string& s) {
    if (s == "node") return ActionComponent::Kind::Node;
    if (s == "edge") return ActionComponent::Kind::Edge;
    if (s == "path") return ActionComponent::Kind::Path;
    if (s == "object") return ActionComponent::Kind::Object;
    throw std::invalid_argument("unknown action component kind: " + s);
}

}  // namespace

std::string ActionDescriptor::to_string() const {
    std::ostringstream os;
    for (size_t i = 0; i < components.size(); ++i) {
        const auto& c = components[i];
        if (i) os << '+';
        os << kind_name(c.kind) << '(';
        for (size_t j = 0; j < c.nodes.size(); ++j) {
            if (j) os << ',';
            os << c.nodes[j];
        }
        if (c.kind == ActionComponent::Kind::Object) {
            if (c.option >= 0) os << '#' << c.option;
            if (!c.text.empty()) os << '"' << c.text << '"';
        }
        os << ')';
    }
    return os.str();
}

std::string to_json(const ActionDescriptor& a) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const auto& c : a.components) {
        nlohmann::ordered_json jc;
        jc["kind"] = kind_name(c.kind);
        if (!c.graph.empty()) jc["graph"] = c.graph;
        if (!c.nodes.empty()) jc["nodes"] = c.nodes;
        if (c.kind == ActionComponent::Kind::Object) {
            if (!c.text.empty()) jc["text"] = c.text;
            if (c.option >= 0) jc["option"] = c.option;
        }
        j.push_back(std::move(jc));
    }
    return j.dump();
}

ActionDescriptor action_from_json(const std::string& text) {
    ActionDescriptor a;
    auto j = nlohmann::ordered_json::parse(text);
    for (const auto& jc : j) {
        ActionComponent c;
        c.kind = kind_from_name(jc.at("kind").get<std::string>());
        if (jc.contains("graph")) c.graph = jc.at("graph").get<std::string>();
        if (jc.contains("nodes")) c.nodes = jc.at("nodes").get<std::vector<int>>();
        if (jc.contains("text")) c.text = jc.at("text").get<std::string>();
        if (jc.contains("option")) c.option = jc.at("option").get<int>();
        a.components.push_back(std::move(c));
    }
    return a;
}

}  // namespace lagco
