#pragma once

#include "fgs/dataset.hpp"
#include "fgs/graph.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fgs {

struct SimConfig {
    int vars = 0;
    int num_edges = -1; // -1 means "equal to vars"
    int samples = 1000;
    double coef_low = 0.05; // coefficient magnitude range, sign is random
    double coef_high = 1.5;
    double var_low = 1.0; // error variance range
    double var_high = 3.0;
    std::uint64_t seed = 0;

    int edges() const { return num_edges < 0 ? vars : num_edges; }

    void validate() const {
        if (vars < 1) throw std::invalid_argument("vars must be >= 1");
        if (samples < 2) throw std::invalid_argument("samples must be >= 2");
        const long long max_edges = static_cast<long long>(vars) * (vars - 1) / 2;
        if (edges() < 0 || edges() > max_edges)
            throw std::invalid_argument("num_edges exceeds p(p-1)/2");
        if (!(0.0 < coef_low && coef_low <= coef_high))
            throw std::invalid_argument("bad coefficient range");
        if (!(0.0 < var_low && var_low <= var_high))
            throw std::invalid_argument("bad variance range");
    }
};

/// Linear-Gaussian structural equation model: acyclic graph, one coefficient
/// per directed edge, one error variance per node.
struct SemModel {
    MixedGraph dag;
    std::map<std::pair<int, int>, double> coefficients; // (from, to) -> a
    std::vector<double> error_variances;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream) so the graph/parameter/sample streams
    // are independent but fully determined by the seed
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::vector<std::string> default_names(int p) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(p));
    for (int i = 1; i <= p; ++i) names.push_back("X" + std::to_string(i));
    return names;
}

} // namespace detail

/// Sparse random DAG: nodes in list order, cfg.edges() distinct forward
/// pairs (i < j) chosen uniformly without replacement, each directed i->j.
/// Acyclic by construction.
inline MixedGraph random_forward_dag(const SimConfig& cfg) {
    cfg.validate();
    MixedGraph g(detail::default_names(cfg.vars));
    std::mt19937_64 rng(detail::mix_seed(cfg.seed, 1));
    std::uniform_int_distribution<int> pick(0, cfg.vars - 1);
    int placed = 0;
    while (placed < cfg.edges()) {
        int a = pick(rng);
        int b = pick(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (g.is_adjacent(a, b)) continue;
        g.add_directed(a, b);
        ++placed;
    }
    return g;
}

/// Draws edge coefficients uniform in magnitude from [coef_low, coef_high]
/// with equiprobable sign, and error variances uniform in [var_low, var_high].
inline SemModel parameterize(const MixedGraph& dag, const SimConfig& cfg) {
    cfg.validate();
    if (dag.has_directed_cycle()) throw std::invalid_argument("parameterize: graph is cyclic");
    SemModel model{dag, {}, std::vector<double>(static_cast<std::size_t>(dag.node_count()))};
    std::mt19937_64 rng(detail::mix_seed(cfg.seed, 2));
    std::uniform_real_distribution<double> magnitude(cfg.coef_low, cfg.coef_high);
    std::uniform_real_distribution<double> variance(cfg.var_low, cfg.var_high);
    std::bernoulli_distribution negative(0.5);
    for (const Edge& e : dag.edges()) {
        if (!e.directed) throw std::invalid_argument("parameterize: graph has undirected edges");
        const double a = magnitude(rng);
        model.coefficients[{e.from, e.to}] = negative(rng) ? -a : a;
    }
    for (double& v : model.error_variances) v = variance(rng);
    return model;
}

/// n i.i.d. samples generated recursively in topological order:
/// X = sum a * parent + e, e ~ N(0, error variance).
inline Dataset draw_samples(const SemModel& model, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("draw_samples: n must be >= 2");
    const int p = model.dag.node_count();

    // topological order of the DAG
    std::vector<int> order;
    order.reserve(static_cast<std::size_t>(p));
    {
        std::vector<int> indegree(static_cast<std::size_t>(p), 0);
        for (int v = 0; v < p; ++v)
            indegree[static_cast<std::size_t>(v)] = static_cast<int>(model.dag.parents(v).size());
        std::vector<int> ready;
        for (int v = p - 1; v >= 0; --v)
            if (indegree[static_cast<std::size_t>(v)] == 0) ready.push_back(v);
        while (!ready.empty()) {
            const int v = ready.back();
            ready.pop_back();
            order.push_back(v);
            for (int c : model.dag.children(v))
                if (--indegree[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
        }
        if (static_cast<int>(order.size()) != p)
            throw std::invalid_argument("draw_samples: model graph is cyclic");
    }

    Dataset data;
    data.names = model.dag.names();
    data.n = static_cast<std::size_t>(n);
    data.columns.assign(static_cast<std::size_t>(p), std::vector<double>(data.n, 0.0));

    std::mt19937_64 rng(detail::mix_seed(seed, 3));
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < data.n; ++t) {
        for (int v : order) {
            double value = std::sqrt(model.error_variances[static_cast<std::size_t>(v)]) * unit(rng);
            for (int q : model.dag.parents(v))
                value += model.coefficients.at({q, v}) * data.columns[static_cast<std::size_t>(q)][t];
            data.columns[static_cast<std::size_t>(v)][t] = value;
        }
    }
    return data;
}

} // namespace fgs
