#pragma once

#include <string>
#include <vector>

namespace lagco {

// One decision component of an action: a node, an ordered edge, a node path,
// or a non-graph attribute payload (text and/or a small discrete option).
struct ActionComponent {
    enum class Kind { Node, Edge, Path, Object };

    Kind kind = Kind::Node;
    std::string graph;       // bundle graph the ids refer to
    std::vector<int> nodes;  // 1 for Node, 2 for Edge, >=1 for Path
    std::string text;        // Object payload (e.g. vulnerability description)
    int option = -1;         // Object discrete option (e.g. weight-delta index)

    static ActionComponent node(std::string graph, int id);
    static ActionComponent edge(std::string graph, int u, int v);
    static ActionComponent path(std::string graph, std::vector<int> nodes);
    static ActionComponent object(std::string text, int option = -1);

    bool operator==(const ActionComponent& other) const = default;
};

struct ActionDescriptor {
    std::vector<ActionComponent> components;

    bool operator==(const ActionDescriptor& other) const = default;
    std::string to_string() const;
};

std::string to_json(const ActionDescriptor& a);
ActionDescriptor action_from_json(const std::string& text);

}  // namespace lagco
