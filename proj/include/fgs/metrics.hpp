#pragma once

#include "fgs/graph.hpp"

#include <cstdio>
#include <stdexcept>
#include <string>

namespace fgs {

/// Adjacency and arrow-orientation confusion counts with the derived
/// precision/recall. When a denominator is zero the ratio is reported as 1.0
/// and the matching *_defined flag is cleared.
struct ComparisonStats {
    long adj_tp = 0, adj_fp = 0, adj_fn = 0;
    long arrow_tp = 0, arrow_fp = 0, arrow_fn = 0;
    double adj_precision = 1.0, adj_recall = 1.0;
    double arrow_precision = 1.0, arrow_recall = 1.0;
    bool adj_precision_defined = false, adj_recall_defined = false;
    bool arrow_precision_defined = false, arrow_recall_defined = false;
};

namespace detail {

inline double ratio(long tp, long other, bool& defined) {
    defined = tp + other > 0;
    return defined ? static_cast<double>(tp) / static_cast<double>(tp + other) : 1.0;
}

} // namespace detail

/// Compares an estimated pattern against the true pattern. Adjacencies are
/// unordered pairs with any edge kind; arrows are ordered pairs, and X->Y
/// matches only X->Y (an estimated X<-Y against a true X->Y counts one FP
/// plus one FN). Node sets must coincide, matched by name.
inline ComparisonStats compare_patterns(const MixedGraph& estimated, const MixedGraph& truth) {
    const int p = truth.node_count();
    if (estimated.node_count() != p)
        throw std::invalid_argument("compare_patterns: node sets differ");
    // estimate index <-> truth index, matched by name
    std::vector<int> to_truth(static_cast<std::size_t>(p));
    std::vector<int> to_est(static_cast<std::size_t>(p));
    for (int v = 0; v < p; ++v) {
        const int w = truth.index_of(estimated.name(v));
        if (w < 0) throw std::invalid_argument("compare_patterns: node sets differ");
        to_truth[static_cast<std::size_t>(v)] = w;
        to_est[static_cast<std::size_t>(w)] = v;
    }

    ComparisonStats stats;
    for (const Edge& e : estimated.edges()) {
        const int a = to_truth[static_cast<std::size_t>(e.from)];
        const int b = to_truth[static_cast<std::size_t>(e.to)];
        truth.is_adjacent(a, b) ? ++stats.adj_tp : ++stats.adj_fp;
        if (e.directed) truth.has_directed(a, b) ? ++stats.arrow_tp : ++stats.arrow_fp;
    }
    for (const Edge& e : truth.edges()) {
        const int a = to_est[static_cast<std::size_t>(e.from)];
        const int b = to_est[static_cast<std::size_t>(e.to)];
        if (!estimated.is_adjacent(a, b)) ++stats.adj_fn;
        if (e.directed && !estimated.has_directed(a, b)) ++stats.arrow_fn;
    }

    stats.adj_precision = detail::ratio(stats.adj_tp, stats.adj_fp, stats.adj_precision_defined);
    stats.adj_recall = detail::ratio(stats.adj_tp, stats.adj_fn, stats.adj_recall_defined);
    stats.arrow_precision =
        detail::ratio(stats.arrow_tp, stats.arrow_fp, stats.arrow_precision_defined);
    stats.arrow_recall = detail::ratio(stats.arrow_tp, stats.arrow_fn, stats.arrow_recall_defined);
    return stats;
}

/// One benchmark-table row: vars, time, then the four accuracy statistics as
/// percentages with one decimal, tab separated.
inline std::string stats_row(int vars, double time_value, const ComparisonStats& s) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d\t%.1f\t%.1f\t%.1f\t%.1f\t%.1f", vars, time_value,
                  100.0 * s.adj_precision, 100.0 * s.adj_recall, 100.0 * s.arrow_precision,
                  100.0 * s.arrow_recall);
    return buf;
}

} // namespace fgs
