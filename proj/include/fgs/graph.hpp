#pragma once

#include <algorithm>
#include <deque>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fgs {

/// One edge per unordered pair. Undirected edges are normalized to a < b.
struct Edge {
    int from = -1;
    int to = -1;
    bool directed = false;

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// Mixed graph of directed and undirected edges over indexed, named variables.
///
/// Per-node parent/child/undirected-neighbor indexes are maintained on every
/// mutation so adjacency and clique tests are cheap. At most one edge per
/// unordered pair; no self loops.
class MixedGraph {
public:
    MixedGraph() = default;

    explicit MixedGraph(std::vector<std::string> names) : names_(std::move(names)) {
        const int p = static_cast<int>(names_.size());
        parents_.resize(p);
        children_.resize(p);
        undirected_.resize(p);
        adjacent_.resize(p);
        for (int i = 0; i < p; ++i) {
            if (!index_by_name_.emplace(names_[i], i).second)
                throw std::invalid_argument("duplicate node name: " + names_[i]);
        }
    }

    int node_count() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(int v) const { return names_.at(static_cast<std::size_t>(v)); }

    /// -1 when the name is unknown.
    int index_of(const std::string& name) const {
        auto it = index_by_name_.find(name);
        return it == index_by_name_.end() ? -1 : it->second;
    }

    const std::set<int>& parents(int v) const { return parents_[check(v)]; }
    const std::set<int>& children(int v) const { return children_[check(v)]; }
    const std::set<int>& undirected_neighbors(int v) const { return undirected_[check(v)]; }
    const std::set<int>& adjacents(int v) const { return adjacent_[check(v)]; }

    bool is_adjacent(int a, int b) const { return adjacent_[check(a)].count(check(b)) > 0; }
    bool has_directed(int from, int to) const { return children_[check(from)].count(check(to)) > 0; }
    bool has_undirected(int a, int b) const { return undirected_[check(a)].count(check(b)) > 0; }

    int edge_count() const { return directed_count_ + undirected_count_; }
    int directed_edge_count() const { return directed_count_; }
    int undirected_edge_count() const { return undirected_count_; }

    void add_directed(int from, int to) {
        require_new_pair(from, to);
        children_[from].insert(to);
        parents_[to].insert(from);
        link(from, to);
        ++directed_count_;
    }

    void add_undirected(int a, int b) {
        require_new_pair(a, b);
        undirected_[a].insert(b);
        undirected_[b].insert(a);
        link(a, b);
        ++undirected_count_;
    }

    /// Removes whatever edge exists between a and b.
    void remove_edge(int a, int b) {
        check(a);
        check(b);
        if (children_[a].erase(b) > 0) {
            parents_[b].erase(a);
            --directed_count_;
        } else if (children_[b].erase(a) > 0) {
            parents_[a].erase(b);
            --directed_count_;
        } else if (undirected_[a].erase(b) > 0) {
            undirected_[b].erase(a);
            --undirected_count_;
        } else {
            throw std::invalid_argument("remove_edge: no edge between the given nodes");
        }
        adjacent_[a].erase(b);
        adjacent_[b].erase(a);
    }

    /// Turns the undirected edge a--b into a->b.
    void orient(int from, int to) {
        check(from);
        check(to);
        if (undirected_[from].erase(to) == 0)
            throw std::invalid_argument("orient: edge is not undirected");
        undirected_[to].erase(from);
        children_[from].insert(to);
        parents_[to].insert(from);
        --undirected_count_;
        ++directed_count_;
    }

    /// Turns the directed edge a->b into a--b. Adjacency is preserved.
    void undirect(int from, int to) {
        check(from);
        check(to);
        if (children_[from].erase(to) == 0)
            throw std::invalid_argument("undirect: edge is not directed from->to");
        parents_[to].erase(from);
        undirected_[from].insert(to);
        undirected_[to].insert(from);
        ++undirected_count_;
        --directed_count_;
    }

    /// True iff every pair in s is adjacent (any edge kind). Empty and
    /// singleton sets are vacuously cliques.
    bool is_clique(std::span<const int> s) const {
        for (std::size_t i = 0; i < s.size(); ++i) {
            check(s[i]);
            for (std::size_t j = i + 1; j < s.size(); ++j)
                if (!is_adjacent(s[i], s[j])) return false;
        }
        return true;
    }

    bool is_clique(const std::set<int>& s) const {
        std::vector<int> v(s.begin(), s.end());
        return is_clique(std::span<const int>(v));
    }

    /// True iff a path from `from` to `to` exists whose edges are undirected
    /// or directed in the direction of travel, visiting no node in `avoid`.
    bool exists_semidirected_path(int from, int to, const std::set<int>& avoid = {}) const {
        check(from);
        check(to);
        if (from == to) throw std::invalid_argument("exists_semidirected_path: from == to");
        if (avoid.count(from) > 0) return false;
        std::vector<char> seen(names_.size(), 0);
        std::deque<int> queue{from};
        seen[static_cast<std::size_t>(from)] = 1;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            for (const auto* step : {&children_[v], &undirected_[v]}) {
                for (int w : *step) {
                    if (w == to) return true;
                    if (seen[static_cast<std::size_t>(w)] || avoid.count(w) > 0) continue;
                    seen[static_cast<std::size_t>(w)] = 1;
                    queue.push_back(w);
                }
            }
        }
        return false;
    }

    /// True iff the directed part contains a cycle.
    bool has_directed_cycle() const {
        const int p = node_count();
        std::vector<int> indegree(p, 0);
        for (int v = 0; v < p; ++v) indegree[v] = static_cast<int>(parents_[v].size());
        std::deque<int> queue;
        for (int v = 0; v < p; ++v)
            if (indegree[v] == 0) queue.push_back(v);
        int emitted = 0;
        while (!queue.empty()) {
            const int v = queue.front();
            queue.pop_front();
            ++emitted;
            for (int c : children_[v])
                if (--indegree[c] == 0) queue.push_back(c);
        }
        return emitted != p;
    }

    /// True iff p->v sits in an unshielded collider p->v<-q of the current graph.
    bool is_collider_forced(int p, int v) const {
        for (int q : parents_[check(v)])
            if (q != p && !is_adjacent(q, p)) return true;
        return false;
    }

    /// All edges, sorted by (min endpoint index, max endpoint index).
    std::vector<Edge> edges() const {
        std::vector<Edge> out;
        out.reserve(static_cast<std::size_t>(edge_count()));
        const int p = node_count();
        for (int a = 0; a < p; ++a) {
            for (int b : undirected_[a])
                if (a < b) out.push_back({a, b, false});
            for (int b : children_[a])
                if (a < b) out.push_back({a, b, true});
            for (int b : parents_[a])
                if (a < b) out.push_back({b, a, true});
        }
        std::sort(out.begin(), out.end(), [](const Edge& l, const Edge& r) {
            const auto lo = std::minmax(l.from, l.to);
            const auto ro = std::minmax(r.from, r.to);
            return lo < ro;
        });
        return out;
    }

    friend bool operator==(const MixedGraph& a, const MixedGraph& b) {
        return a.names_ == b.names_ && a.children_ == b.children_ && a.undirected_ == b.undirected_;
    }

private:
    int check(int v) const {
        if (v < 0 || v >= node_count()) throw std::out_of_range("unknown variable index");
        return v;
    }

    void require_new_pair(int a, int b) {
        check(a);
        check(b);
        if (a == b) throw std::invalid_argument("self loops are not allowed");
        if (is_adjacent(a, b)) throw std::invalid_argument("pair already has an edge");
    }

    void link(int a, int b) {
        adjacent_[a].insert(b);
        adjacent_[b].insert(a);
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, int> index_by_name_;
    std::vector<std::set<int>> parents_;
    std::vector<std::set<int>> children_;
    std::vector<std::set<int>> undirected_;
    std::vector<std::set<int>> adjacent_;
    int directed_count_ = 0;
    int undirected_count_ = 0;
};

namespace detail {

/// Work queue of nodes with membership dedup; nodes may re-enter after being
/// popped, but are never queued twice at once.
class NodeWorklist {
public:
    explicit NodeWorklist(int p) : queued_(static_cast<std::size_t>(p), 0) {}

    void push(int v) {
        if (!queued_[static_cast<std::size_t>(v)]) {
            queued_[static_cast<std::size_t>(v)] = 1;
            queue_.push_back(v);
        }
    }

    void push_with_adjacents(const MixedGraph& g, int v) {
        push(v);
        for (int w : g.adjacents(v)) push(w);
    }

    bool empty() const { return queue_.empty(); }

    int pop() {
        const int v = queue_.front();
        queue_.pop_front();
        queued_[static_cast<std::size_t>(v)] = 0;
        return v;
    }

private:
    std::deque<int> queue_;
    std::vector<char> queued_;
};

// Meek orientation rules for one undirected edge a--b, checked as a->b.

inline bool meek_r1(const MixedGraph& g, int a, int b) {
    // c->a, a--b, c and b nonadjacent  =>  a->b
    for (int c : g.parents(a))
        if (!g.is_adjacent(c, b)) return true;
    return false;
}

inline bool meek_r2(const MixedGraph& g, int a, int b) {
    // a->c->b with a--b  =>  a->b
    for (int c : g.children(a))
        if (g.has_directed(c, b)) return true;
    return false;
}

inline bool meek_r3(const MixedGraph& g, int a, int b) {
    // a--c, a--d, c->b, d->b, c and d nonadjacent  =>  a->b
    std::vector<int> spouses;
    for (int c : g.undirected_neighbors(a))
        if (g.has_directed(c, b)) spouses.push_back(c);
    for (std::size_t i = 0; i < spouses.size(); ++i)
        for (std::size_t j = i + 1; j < spouses.size(); ++j)
            if (!g.is_adjacent(spouses[i], spouses[j])) return true;
    return false;
}

inline bool meek_r4(const MixedGraph& g, int a, int b) {
    // a--c, c->d, d->b, c and b nonadjacent, a and d adjacent  =>  a->b
    for (int c : g.undirected_neighbors(a)) {
        if (g.is_adjacent(c, b)) continue;
        for (int d : g.children(c))
            if (g.has_directed(d, b) && g.is_adjacent(a, d)) return true;
    }
    return false;
}

inline bool meek_any_rule(const MixedGraph& g, int a, int b) {
    return meek_r1(g, a, b) || meek_r2(g, a, b) || meek_r3(g, a, b) || meek_r4(g, a, b);
}

/// Runs the rules to fixpoint starting from `seeds`. Every newly directed
/// edge re-queues its endpoints and their adjacents so enabled instances at
/// distance one are revisited. Appends oriented edges to `out` when given.
inline void meek_fixpoint(MixedGraph& g, NodeWorklist& work,
                          std::vector<std::pair<int, int>>* out) {
    while (!work.empty()) {
        const int v = work.pop();
        // snapshot: orienting mutates the neighbor set we iterate
        const std::vector<int> nbrs(g.undirected_neighbors(v).begin(),
                                    g.undirected_neighbors(v).end());
        for (int w : nbrs) {
            if (!g.has_undirected(v, w)) continue;
            int from = -1, to = -1;
            if (meek_any_rule(g, v, w)) {
                from = v;
                to = w;
            } else if (meek_any_rule(g, w, v)) {
                from = w;
                to = v;
            }
            if (from >= 0) {
                g.orient(from, to);
                if (out != nullptr) out->emplace_back(from, to);
                work.push_with_adjacents(g, from);
                work.push_with_adjacents(g, to);
            }
        }
    }
}

/// Undirects every directed edge into nodes reachable from `work` that is not
/// held in place by an unshielded collider. Undirecting an edge re-queues both
/// endpoints and their adjacents. Records touched nodes in `changed`.
inline void undirect_unforced(MixedGraph& g, NodeWorklist& work, std::set<int>& changed) {
    while (!work.empty()) {
        const int v = work.pop();
        const std::vector<int> ps(g.parents(v).begin(), g.parents(v).end());
        // one-shot evaluation: collider membership is decided against the
        // parent set as it stands when v is popped
        std::vector<int> unforced;
        for (int p : ps)
            if (!g.is_collider_forced(p, v)) unforced.push_back(p);
        for (int p : unforced) {
            g.undirect(p, v);
            changed.insert(p);
            changed.insert(v);
            work.push_with_adjacents(g, p);
            work.push_with_adjacents(g, v);
        }
    }
}

} // namespace detail

/// Applies Meek rules R1-R4 to fixpoint, starting from `focus` (all nodes when
/// empty) and propagating outward. Returns the edges newly directed.
inline std::vector<std::pair<int, int>> apply_meek_rules(MixedGraph& g,
                                                         std::span<const int> focus = {}) {
    detail::NodeWorklist work(g.node_count());
    if (focus.empty()) {
        for (int v = 0; v < g.node_count(); ++v) work.push(v);
    } else {
        for (int v : focus) work.push_with_adjacents(g, v);
    }
    std::vector<std::pair<int, int>> oriented;
    detail::meek_fixpoint(g, work, &oriented);
    return oriented;
}

/// Rebuilds the pattern of g in place: every directed edge not participating
/// in an unshielded collider is undirected, then Meek rules run to fixpoint.
/// Throws when the directed part of g is cyclic.
inline void revert_to_cpdag_global(MixedGraph& g) {
    if (g.has_directed_cycle())
        throw std::invalid_argument("revert_to_cpdag_global: directed part has a cycle");
    const int p = g.node_count();
    for (int v = 0; v < p; ++v) {
        const std::vector<int> ps(g.parents(v).begin(), g.parents(v).end());
        for (int q : ps)
            if (!g.is_collider_forced(q, v)) g.undirect(q, v);
    }
    detail::NodeWorklist work(p);
    for (int v = 0; v < p; ++v) work.push(v);
    detail::meek_fixpoint(g, work, nullptr);
}

/// Local pattern rebuild after an edge change at (x, y). Orientation
/// eliminations and new orientations both propagate outward, so the result is
/// identical to revert_to_cpdag_global. Returns the nodes whose incident
/// edges were touched.
inline std::set<int> revert_to_cpdag_local(MixedGraph& g, int x, int y) {
    std::set<int> changed{x, y};
    detail::NodeWorklist undirect_work(g.node_count());
    undirect_work.push_with_adjacents(g, x);
    undirect_work.push_with_adjacents(g, y);
    detail::undirect_unforced(g, undirect_work, changed);

    detail::NodeWorklist meek_work(g.node_count());
    meek_work.push_with_adjacents(g, x);
    meek_work.push_with_adjacents(g, y);
    for (int v : changed) meek_work.push_with_adjacents(g, v);
    std::vector<std::pair<int, int>> oriented;
    detail::meek_fixpoint(g, meek_work, &oriented);
    for (const auto& [a, b] : oriented) {
        changed.insert(a);
        changed.insert(b);
    }
    return changed;
}

namespace detail {

inline std::set<std::tuple<int, int, int>> unshielded_colliders(const MixedGraph& g) {
    std::set<std::tuple<int, int, int>> out;
    for (int v = 0; v < g.node_count(); ++v) {
        const auto& ps = g.parents(v);
        for (auto i = ps.begin(); i != ps.end(); ++i)
            for (auto j = std::next(i); j != ps.end(); ++j)
                if (!g.is_adjacent(*i, *j)) out.emplace(*i, v, *j);
    }
    return out;
}

} // namespace detail

/// A DAG from the equivalence class of `pattern`: repeatedly directs an
/// undirected edge and propagates Meek rules until none remain. The result
/// has the same skeleton and the same unshielded colliders as the input.
/// Throws when the pattern admits no consistent extension.
inline MixedGraph dag_from_pattern(const MixedGraph& pattern) {
    MixedGraph g = pattern;
    if (g.has_directed_cycle())
        throw std::invalid_argument("dag_from_pattern: directed part has a cycle");
    const auto colliders_before = detail::unshielded_colliders(g);
    while (g.undirected_edge_count() > 0) {
        int a = -1, b = -1;
        for (int v = 0; v < g.node_count() && a < 0; ++v) {
            const auto& nbrs = g.undirected_neighbors(v);
            for (int w : nbrs) {
                if (w > v) {
                    a = v;
                    b = w;
                    break;
                }
            }
        }
        g.orient(a, b);
        const int focus[] = {a, b};
        apply_meek_rules(g, focus);
    }
    if (g.has_directed_cycle() || detail::unshielded_colliders(g) != colliders_before)
        throw std::invalid_argument("dag_from_pattern: no consistent extension");
    return g;
}

} // namespace fgs
