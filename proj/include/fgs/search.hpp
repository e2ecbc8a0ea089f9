#pragma once

#include "fgs/graph.hpp"
#include "fgs/parallel.hpp"
#include "fgs/score.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fgs {

/// Candidate operator: insert x->y with subset S (forward) or delete the
/// x-y edge with subset H (backward), worth `bump` in score.
struct Arrow {
    double bump = 0.0;
    int x = -1;
    int y = -1;
    std::vector<int> na_yx;  // undirected neighbors of y adjacent to x, sorted
    std::vector<int> subset; // S in the forward phase, H in the backward phase

    friend bool operator==(const Arrow&, const Arrow&) = default;
};

/// Total order: bump descending, then x, y, subset, naYX. Strict and
/// deterministic, so iteration order never depends on insertion history or
/// thread count.
struct ArrowOrder {
    bool operator()(const Arrow& a, const Arrow& b) const {
        if (a.bump != b.bump) return a.bump > b.bump;
        if (a.x != b.x) return a.x < b.x;
        if (a.y != b.y) return a.y < b.y;
        if (a.subset != b.subset) return a.subset < b.subset;
        return a.na_yx < b.na_yx;
    }
};

/// Candidate arrows in descending bump order with per-ordered-pair removal.
class ArrowQueue {
public:
    bool empty() const { return arrows_.empty(); }
    std::size_t size() const { return arrows_.size(); }

    void insert(Arrow a) {
        auto [it, fresh] = arrows_.insert(std::move(a));
        if (fresh) by_pair_[{it->x, it->y}].push_back(*it);
    }

    Arrow pop_front() {
        Arrow a = *arrows_.begin();
        arrows_.erase(arrows_.begin());
        auto& bucket = by_pair_[{a.x, a.y}];
        bucket.erase(std::find(bucket.begin(), bucket.end(), a));
        return a;
    }

    /// Removes every arrow stored for the ordered pair (x, y).
    void clear_pair(int x, int y) {
        auto it = by_pair_.find({x, y});
        if (it == by_pair_.end()) return;
        for (const Arrow& a : it->second) arrows_.erase(a);
        by_pair_.erase(it);
    }

    void clear() {
        arrows_.clear();
        by_pair_.clear();
    }

    const std::set<Arrow, ArrowOrder>& arrows() const { return arrows_; }

private:
    std::set<Arrow, ArrowOrder> arrows_;
    std::map<std::pair<int, int>, std::vector<Arrow>> by_pair_;
};

/// Symmetric relation over variable pairs whose initial single-parent bump
/// was positive; the "non-zero total effect" surrogate used for pruning.
class EffectPairs {
public:
    explicit EffectPairs(int p) : partners_(static_cast<std::size_t>(p)) {}

    void add(int a, int b) {
        partners_[static_cast<std::size_t>(a)].push_back(b);
        partners_[static_cast<std::size_t>(b)].push_back(a);
        ++count_;
    }

    bool contains(int a, int b) const {
        const auto& v = partners_[static_cast<std::size_t>(a)];
        return std::binary_search(v.begin(), v.end(), b);
    }

    const std::vector<int>& partners(int v) const {
        return partners_[static_cast<std::size_t>(v)];
    }

    std::size_t pair_count() const { return count_; }

    void finish() {
        for (auto& v : partners_) std::sort(v.begin(), v.end());
    }

private:
    std::vector<std::vector<int>> partners_;
    std::size_t count_ = 0;
};

struct SearchConfig {
    ScoreConfig score;
    bool effect_edge_pruning = true;
    std::optional<int> max_subset_size; // cap on |S| and |H| enumeration
    int threads = 1;

    void validate() const {
        score.validate();
        if (threads < 1) throw std::invalid_argument("thread count must be >= 1");
        if (max_subset_size && *max_subset_size < 0)
            throw std::invalid_argument("max subset size must be >= 0");
    }
};

/// NaYX: undirected neighbors of y that are adjacent to x, sorted.
inline std::vector<int> na_yx_set(const MixedGraph& g, int x, int y) {
    std::vector<int> out;
    for (int z : g.undirected_neighbors(y))
        if (g.is_adjacent(z, x)) out.push_back(z);
    return out;
}

/// T: undirected neighbors of y that are not adjacent to x, sorted.
inline std::vector<int> t_neighbors(const MixedGraph& g, int x, int y) {
    std::vector<int> out;
    for (int z : g.undirected_neighbors(y))
        if (!g.is_adjacent(z, x)) out.push_back(z);
    return out;
}

namespace detail {

/// Calls fn for every subset of `items` with size <= cap, sizes ascending,
/// combinations in lexicographic order within a size.
template <typename Fn>
void for_each_subset(const std::vector<int>& items, std::optional<int> cap, Fn&& fn) {
    const int n = static_cast<int>(items.size());
    const int max_k = cap ? std::min(*cap, n) : n;
    std::vector<int> subset;
    fn(subset); // empty set
    std::vector<int> idx;
    for (int k = 1; k <= max_k; ++k) {
        idx.resize(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
        while (true) {
            subset.clear();
            for (int i : idx) subset.push_back(items[static_cast<std::size_t>(i)]);
            fn(subset);
            int pos = k - 1;
            while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int i = pos + 1; i < k; ++i)
                idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
        }
    }
}

inline std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

} // namespace detail

/// Forward-phase candidates for the ordered nonadjacent pair (x, y): one
/// arrow per subset S of T with a positive bump, conditioning y on
/// parents(y) u NaYX u S.
inline std::vector<Arrow> calc_arrows_forward(const MixedGraph& g, int x, int y,
                                              const SemBicScore& score,
                                              const SearchConfig& cfg) {
    if (g.is_adjacent(x, y))
        throw std::invalid_argument("calc_arrows_forward: x and y must be nonadjacent");
    const std::vector<int> na = na_yx_set(g, x, y);
    const std::vector<int> t = t_neighbors(g, x, y);
    const auto& parents = g.parents(y);
    const std::vector<int> base =
        detail::sorted_union(std::vector<int>(parents.begin(), parents.end()), na);

    std::vector<Arrow> out;
    detail::for_each_subset(t, cfg.max_subset_size, [&](const std::vector<int>& s) {
        const std::vector<int> cond = detail::sorted_union(base, s);
        const auto bump = score.score_diff(x, y, cond);
        if (bump && *bump > 0.0) out.push_back({*bump, x, y, na, s});
    });
    return out;
}

/// Backward-phase candidates for the ordered adjacent pair (x, y): one arrow
/// per subset H of NaYX for which NaYX \ H is a clique and removing x from
/// y's conditioning set raises the score.
inline std::vector<Arrow> calc_arrows_backward(const MixedGraph& g, int x, int y,
                                               const SemBicScore& score,
                                               const SearchConfig& cfg) {
    if (!g.is_adjacent(x, y))
        throw std::invalid_argument("calc_arrows_backward: x and y must be adjacent");
    const std::vector<int> na = na_yx_set(g, x, y);
    std::vector<int> parents_less_x;
    for (int p : g.parents(y))
        if (p != x) parents_less_x.push_back(p);

    std::vector<Arrow> out;
    detail::for_each_subset(na, cfg.max_subset_size, [&](const std::vector<int>& h) {
        std::vector<int> diff;
        std::set_difference(na.begin(), na.end(), h.begin(), h.end(), std::back_inserter(diff));
        if (!g.is_clique(std::span<const int>(diff))) return;
        const std::vector<int> cond = detail::sorted_union(parents_less_x, diff);
        const auto gain = score.score_diff(x, y, cond);
        if (gain && -*gain > 0.0) out.push_back({-*gain, x, y, na, h});
    });
    return out;
}

/// Applies the insert encoded by `arrow` when it is valid on the current
/// graph: NaYX u S must be a clique and every semi-directed path from y to x
/// must pass through NaYX u S (the exempt set; such paths become blocked by
/// the collider orientations the insert creates). On success adds x->y,
/// orients each S'->y, rebuilds the pattern locally, and returns true;
/// otherwise leaves g unchanged. `changed` (optional) collects the nodes
/// whose incident edges were touched.
inline bool apply_insert(MixedGraph& g, const Arrow& arrow, std::set<int>* changed = nullptr) {
    const int x = arrow.x;
    const int y = arrow.y;
    if (g.is_adjacent(x, y)) return false;
    const std::vector<int> na = na_yx_set(g, x, y);
    const std::vector<int> test = detail::sorted_union(na, arrow.subset);
    if (!g.is_clique(std::span<const int>(test))) return false;
    if (g.exists_semidirected_path(y, x, std::set<int>(test.begin(), test.end()))) return false;

    g.add_directed(x, y);
    for (int s : arrow.subset) g.orient(s, y);
    std::set<int> touched = revert_to_cpdag_local(g, x, y);
    if (changed != nullptr) {
        touched.insert(arrow.subset.begin(), arrow.subset.end());
        *changed = std::move(touched);
    }
    return true;
}

/// Applies the delete encoded by `arrow`: removes the x-y edge, orients
/// y->h for each h in H (and x->h where that edge is undirected, forming the
/// collider y->h<-x that carries the move), rebuilds the pattern locally.
/// Validity (H within the current NaYX, NaYX \ H a clique) is the caller's
/// responsibility.
inline bool apply_delete(MixedGraph& g, const Arrow& arrow, std::set<int>* changed = nullptr) {
    const int x = arrow.x;
    const int y = arrow.y;
    if (!g.is_adjacent(x, y) || g.has_directed(y, x)) return false;
    g.remove_edge(x, y);
    for (int h : arrow.subset) {
        if (g.has_undirected(y, h)) g.orient(y, h);
        if (g.has_undirected(x, h)) g.orient(x, h);
    }
    std::set<int> touched = revert_to_cpdag_local(g, x, y);
    if (changed != nullptr) {
        touched.insert(arrow.subset.begin(), arrow.subset.end());
        *changed = std::move(touched);
    }
    return true;
}

struct InitialScan {
    std::vector<Arrow> seeds;
    EffectPairs pairs;
};

/// The quadratic startup scan: scores every unordered pair once (one
/// direction only; the empty-parent bump is symmetric), partitioned over the
/// lower triangle of pairs. Positive pairs seed the queue and define the
/// effect-pair relation. Result is independent of the thread count.
inline InitialScan initial_effect_edges(const SemBicScore& score, const SearchConfig& cfg) {
    const int p = static_cast<int>(score.covariance_source().var_count());
    const std::size_t total = static_cast<std::size_t>(p) * (p - 1) / 2;

    auto scan = [&score](std::size_t begin, std::size_t end) {
        std::vector<Arrow> found;
        // flattened lower-triangle index i maps to the pair (x, y), x < y
        std::size_t i = begin;
        int y = static_cast<int>((1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(i))) / 2.0);
        while (static_cast<std::size_t>(y) * (y - 1) / 2 > i) --y;
        while (static_cast<std::size_t>(y + 1) * y / 2 <= i) ++y;
        int x = static_cast<int>(i - static_cast<std::size_t>(y) * (y - 1) / 2);
        for (; i < end; ++i) {
            const auto bump = score.score_diff(x, y, {});
            if (bump && *bump > 0.0) found.push_back({*bump, x, y, {}, {}});
            if (++x == y) {
                x = 0;
                ++y;
            }
        }
        return found;
    };

    InitialScan out{parallel_ranges<Arrow>(total, cfg.threads, scan), EffectPairs(p)};
    for (const Arrow& a : out.seeds) out.pairs.add(a.x, a.y);
    out.pairs.finish();
    return out;
}

enum class Phase { forward, backward };

/// Refreshes queue entries for pairs incident to x or y after an operation
/// at (x, y): stale arrows for the ordered pairs (w, x), (x, w), (w, y),
/// (y, w) are removed and recomputed. With pruning on, only w forming an
/// effect pair with the endpoint is eligible. Scoring is partitioned across
/// workers; the queue contents afterwards do not depend on the partitioning.
inline void rescore_neighbors(const MixedGraph& g, int x, int y, ArrowQueue& queue,
                              const SemBicScore& score, const SearchConfig& cfg,
                              const EffectPairs& pairs, Phase phase) {
    const std::set<int> nodes{x, y};
    // gather ordered pairs to refresh, deterministically and without repeats
    std::set<std::pair<int, int>> stale;
    std::vector<std::pair<int, int>> recompute;
    auto consider = [&](int a, int b, bool valid) {
        if (stale.emplace(a, b).second) {
            queue.clear_pair(a, b);
            if (valid) recompute.emplace_back(a, b);
        }
    };
    for (int v : nodes) {
        if (phase == Phase::forward) {
            const int p = g.node_count();
            for (int w = 0; w < p; ++w) {
                if (w == v || nodes.count(w) > 0) continue;
                if (cfg.effect_edge_pruning && !pairs.contains(w, v)) continue;
                const bool valid = !g.is_adjacent(w, v);
                consider(w, v, valid);
                consider(v, w, valid);
            }
        } else {
            for (int w : g.adjacents(v)) {
                if (nodes.count(w) > 0) continue;
                consider(w, v, !g.has_directed(v, w));
                consider(v, w, !g.has_directed(w, v));
            }
        }
    }

    auto compute = [&](std::size_t begin, std::size_t end) {
        std::vector<Arrow> found;
        for (std::size_t i = begin; i < end; ++i) {
            const auto [a, b] = recompute[i];
            const auto arrows = phase == Phase::forward
                                    ? calc_arrows_forward(g, a, b, score, cfg)
                                    : calc_arrows_backward(g, a, b, score, cfg);
            found.insert(found.end(), arrows.begin(), arrows.end());
        }
        return found;
    };
    for (Arrow& a : parallel_ranges<Arrow>(recompute.size(), cfg.threads, compute))
        queue.insert(std::move(a));
}

/// Fast greedy equivalence search over a covariance source. One coordinating
/// thread owns the graph and queue; workers only evaluate scores.
class Fgs {
public:
    Fgs(const CovarianceSource& cov, SearchConfig cfg)
        : score_(cov, cfg.score), cfg_(cfg), pairs_(static_cast<int>(cov.var_count())) {
        cfg_.validate();
        if (cov.var_count() < 2) throw std::invalid_argument("search needs at least 2 variables");
    }

    /// Observer invoked after every applied operator, once the pattern has
    /// been rebuilt. Used by tests to audit score monotonicity.
    std::function<void(const MixedGraph&)> on_step;

    MixedGraph run() {
        MixedGraph g(score_.covariance_source().names());
        InitialScan scan = initial_effect_edges(score_, cfg_);
        pairs_ = std::move(scan.pairs);
        queue_.clear();
        for (Arrow& a : scan.seeds) queue_.insert(std::move(a));
        forward_phase(g);
        backward_phase(g);
        return g;
    }

    const EffectPairs& effect_pairs() const { return pairs_; }

private:
    void forward_phase(MixedGraph& g) {
        while (!queue_.empty()) {
            const Arrow arrow = queue_.pop_front();
            const int x = arrow.x;
            const int y = arrow.y;
            if (g.is_adjacent(x, y)) continue;
            // discard entries invalidated by graph changes since computation
            if (na_yx_set(g, x, y) != arrow.na_yx) continue;
            const std::vector<int> t = t_neighbors(g, x, y);
            if (!std::includes(t.begin(), t.end(), arrow.subset.begin(), arrow.subset.end()))
                continue;
            std::set<int> changed;
            if (!apply_insert(g, arrow, &changed)) continue;
            queue_.clear_pair(x, y);
            queue_.clear_pair(y, x);
            rescore(g, x, y, changed, Phase::forward);
            if (on_step) on_step(g);
        }
    }

    void backward_phase(MixedGraph& g) {
        queue_.clear();
        for (const Edge& e : g.edges()) {
            for (Arrow& a : calc_arrows_backward(g, e.from, e.to, score_, cfg_))
                queue_.insert(std::move(a));
            if (!e.directed)
                for (Arrow& a : calc_arrows_backward(g, e.to, e.from, score_, cfg_))
                    queue_.insert(std::move(a));
        }
        while (!queue_.empty()) {
            const Arrow arrow = queue_.pop_front();
            const int x = arrow.x;
            const int y = arrow.y;
            if (!g.is_adjacent(x, y) || g.has_directed(y, x)) continue;
            if (na_yx_set(g, x, y) != arrow.na_yx) continue;
            std::vector<int> diff;
            std::set_difference(arrow.na_yx.begin(), arrow.na_yx.end(), arrow.subset.begin(),
                                arrow.subset.end(), std::back_inserter(diff));
            if (!g.is_clique(std::span<const int>(diff))) continue;
            std::set<int> changed;
            if (!apply_delete(g, arrow, &changed)) continue;
            queue_.clear_pair(x, y);
            queue_.clear_pair(y, x);
            rescore(g, x, y, changed, Phase::backward);
            if (on_step) on_step(g);
        }
    }

    /// Rescores around the operated pair, then around every other node whose
    /// incident edges were touched by pattern reversion; ripples can
    /// invalidate arrows for pairs not incident to x or y.
    void rescore(const MixedGraph& g, int x, int y, const std::set<int>& changed, Phase phase) {
        rescore_neighbors(g, x, y, queue_, score_, cfg_, pairs_, phase);
        for (int v : changed) {
            if (v == x || v == y) continue;
            rescore_neighbors(g, v, v, queue_, score_, cfg_, pairs_, phase);
        }
    }

    SemBicScore score_;
    SearchConfig cfg_;
    EffectPairs pairs_;
    ArrowQueue queue_;
};

/// Runs the full search: effect-edge initialization, forward phase to
/// exhaustion, backward phase to exhaustion. Returns the final pattern.
inline MixedGraph fgs(const CovarianceSource& cov, const SearchConfig& cfg) {
    return Fgs(cov, cfg).run();
}

} // namespace fgs
