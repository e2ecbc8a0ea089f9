#pragma once

#include "fgs/graph.hpp"

#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fgs {

/// Edge-list text form: one edge per line, `A --> B` directed, `A --- B`
/// undirected (lower index first), lines ordered by (min endpoint index,
/// max endpoint index), trailing newline.
inline std::string graph_to_text(const MixedGraph& g) {
    std::string out;
    for (const Edge& e : g.edges()) {
        if (e.directed) {
            out += g.name(e.from) + " --> " + g.name(e.to);
        } else {
            const int a = std::min(e.from, e.to);
            const int b = std::max(e.from, e.to);
            out += g.name(a) + " --- " + g.name(b);
        }
        out += '\n';
    }
    return out;
}

/// Parses the edge-list form. Node indexes follow first appearance. Throws
/// std::runtime_error naming the offending line on malformed input.
inline MixedGraph graph_from_text(const std::string& text) {
    std::vector<std::string> names;
    std::unordered_map<std::string, int> index;
    struct ParsedEdge {
        int a, b;
        bool directed;
    };
    std::vector<ParsedEdge> edges;

    auto intern = [&](const std::string& name) {
        auto [it, fresh] = index.emplace(name, static_cast<int>(names.size()));
        if (fresh) names.push_back(name);
        return it->second;
    };

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a, op, b, extra;
        fields >> a >> op >> b;
        if (a.empty() || b.empty() || (op != "-->" && op != "---") || (fields >> extra))
            throw std::runtime_error("malformed edge at line " + std::to_string(line_no) + ": " + line);
        edges.push_back({intern(a), intern(b), op == "-->"});
    }

    MixedGraph g(std::move(names));
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const auto& e = edges[i];
        if (e.a == e.b || g.is_adjacent(e.a, e.b))
            throw std::runtime_error("invalid edge in graph text (duplicate pair or self loop)");
        if (e.directed)
            g.add_directed(e.a, e.b);
        else
            g.add_undirected(e.a, e.b);
    }
    return g;
}

} // namespace fgs
