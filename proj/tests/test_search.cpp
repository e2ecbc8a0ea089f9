#include "fgs/search.hpp"
#include "fgs/simulate.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using fgs::Arrow;
using fgs::ArrowQueue;
using fgs::CovarianceSource;
using fgs::MixedGraph;
using fgs::SearchConfig;
using fgs::SemBicScore;
using oracles::graph_of;
using oracles::var_names;

namespace {

SearchConfig config(double penalty = 2.0, bool pruning = true, int threads = 1) {
    SearchConfig cfg;
    cfg.score.penalty_discount = penalty;
    cfg.effect_edge_pruning = pruning;
    cfg.threads = threads;
    return cfg;
}

CovarianceSource cov_from_model(const fgs::SemModel& model, int n, std::uint64_t seed) {
    return CovarianceSource(fgs::draw_samples(model, n, seed));
}

/// X -> Y <- Z with unit coefficients and unit noise.
fgs::SemModel collider_model() {
    auto dag = graph_of({"X", "Y", "Z"}, {{0, 1}, {2, 1}});
    fgs::SemModel model{dag, {}, {1.0, 1.0, 1.0}};
    model.coefficients[{0, 1}] = 1.0;
    model.coefficients[{2, 1}] = 1.0;
    return model;
}

fgs::SemModel single_edge_model(double a = 1.0) {
    auto dag = graph_of({"X", "Y"}, {{0, 1}});
    fgs::SemModel model{dag, {}, {1.0, 1.0}};
    model.coefficients[{0, 1}] = a;
    return model;
}

double total_score(const MixedGraph& pattern, const SemBicScore& score) {
    const MixedGraph dag = fgs::dag_from_pattern(pattern);
    double total = 0.0;
    for (int v = 0; v < dag.node_count(); ++v) {
        const std::vector<int> parents(dag.parents(v).begin(), dag.parents(v).end());
        total += score.local_score(v, parents).value();
    }
    return total;
}

} // namespace

TEST_CASE("arrow queue ordering and pair removal", "[search]") {
    ArrowQueue q;
    q.insert({2.0, 0, 1, {}, {}});
    q.insert({5.0, 2, 3, {}, {}});
    q.insert({5.0, 1, 2, {}, {}});     // tie: lower (x, y) first
    q.insert({5.0, 1, 2, {}, {4}});    // same pair, other subset
    q.insert({3.5, 3, 2, {}, {}});
    REQUIRE(q.size() == 5);

    Arrow top = q.pop_front();
    CHECK(top.bump == 5.0);
    CHECK(top.x == 1);
    CHECK(top.subset.empty()); // shorter subset sorts first within the tie

    q.clear_pair(1, 2);
    CHECK(q.size() == 3);
    q.clear_pair(2, 3);
    CHECK(q.size() == 2); // (3,2) is a different ordered pair
    CHECK(q.pop_front().x == 3);
    CHECK(q.pop_front().bump == 2.0);
    CHECK(q.empty());
}

TEST_CASE("NaYX and T follow their set definitions", "[search]") {
    SECTION("Z undirected to Y and adjacent to X") {
        auto g = graph_of({"X", "Y", "Z"}, {}, {{2, 1}, {2, 0}});
        CHECK(fgs::na_yx_set(g, 0, 1) == std::vector<int>{2});
        CHECK(fgs::t_neighbors(g, 0, 1).empty());
    }
    SECTION("W undirected to Y, not adjacent to X") {
        auto g = graph_of({"X", "Y", "W"}, {}, {{2, 1}});
        CHECK(fgs::na_yx_set(g, 0, 1).empty());
        CHECK(fgs::t_neighbors(g, 0, 1) == std::vector<int>{2});
    }
    SECTION("no undirected neighbors at all") {
        auto g = graph_of({"X", "Y", "W"}, {{2, 1}});
        CHECK(fgs::na_yx_set(g, 0, 1).empty());
        CHECK(fgs::t_neighbors(g, 0, 1).empty());
    }
}

TEST_CASE("subset enumeration is sized then lexicographic", "[search]") {
    std::vector<std::vector<int>> seen;
    fgs::detail::for_each_subset({4, 7, 9}, std::nullopt,
                                 [&](const std::vector<int>& s) { seen.push_back(s); });
    const std::vector<std::vector<int>> expected{{},    {4},    {7},    {9},
                                                 {4, 7}, {4, 9}, {7, 9}, {4, 7, 9}};
    CHECK(seen == expected);

    seen.clear();
    fgs::detail::for_each_subset({4, 7, 9}, 1, [&](const std::vector<int>& s) { seen.push_back(s); });
    CHECK(seen == std::vector<std::vector<int>>{{}, {4}, {7}, {9}});
}

TEST_CASE("calc_arrows_forward enumerates T subsets against live data", "[search]") {
    // data from the collider: conditioning set {X} raises the bump for Z->Y
    const auto cov = cov_from_model(collider_model(), 2000, 11);
    const SemBicScore score(cov, {2.0});
    auto g = graph_of({"X", "Y", "Z"}, {}, {{0, 1}}); // X--Y in place, scoring (Z, Y)
    const auto arrows = fgs::calc_arrows_forward(g, 2, 1, score, config());
    REQUIRE(arrows.size() == 2); // S = {} and S = {X}
    for (const auto& a : arrows) {
        CHECK(a.bump > 0.0);
        CHECK(a.na_yx.empty());
        CHECK((a.subset.empty() || a.subset == std::vector<int>{0}));
    }
    CHECK(arrows[0].subset != arrows[1].subset);

    CHECK_THROWS_AS(fgs::calc_arrows_forward(g, 0, 1, score, config()), std::invalid_argument);
}

TEST_CASE("apply_insert", "[search]") {
    SECTION("first edge reverts to undirected") {
        MixedGraph g(var_names(3));
        REQUIRE(fgs::apply_insert(g, {1.0, 0, 1, {}, {}}));
        CHECK(g.has_undirected(0, 1));
        CHECK(g.directed_edge_count() == 0);
    }
    SECTION("subset members are reoriented into y, forming colliders") {
        auto g = graph_of({"X", "Y", "W"}, {}, {{2, 1}}); // W--Y, W not adjacent to X
        std::set<int> changed;
        REQUIRE(fgs::apply_insert(g, {1.0, 0, 1, {}, {2}}, &changed));
        CHECK(g.has_directed(0, 1));
        CHECK(g.has_directed(2, 1)); // unshielded collider X->Y<-W survives reversion
        CHECK(changed.count(2) == 1);
    }
    SECTION("semi-directed cycle rejected") {
        auto g = graph_of({"X", "Y", "W"}, {{1, 2}}, {{2, 0}}); // Y->W--X
        const MixedGraph before = g;
        CHECK_FALSE(fgs::apply_insert(g, {1.0, 0, 1, {}, {}}));
        CHECK(g == before);
    }
    SECTION("clique violation rejected") {
        // NaYX = {W, Z} with W, Z nonadjacent
        auto g = graph_of(var_names(4), {}, {{2, 1}, {3, 1}, {2, 0}, {3, 0}});
        const MixedGraph before = g;
        CHECK_FALSE(fgs::apply_insert(g, {1.0, 0, 1, {2, 3}, {}}));
        CHECK(g == before);
    }
}

TEST_CASE("calc_arrows_backward subsets and clique filter", "[search]") {
    const auto cov = cov_from_model(collider_model(), 500, 3);
    const SemBicScore score(cov, {0.01}); // tiny penalty: deletions score negative
    SECTION("NaYX empty yields the single candidate H = {}") {
        auto g = graph_of({"X", "Y", "Z"}, {}, {{0, 1}});
        // bump sign depends on data; enumerate with a huge penalty so every
        // deletion is worth taking
        const SemBicScore generous(cov, {1000.0});
        const auto arrows = fgs::calc_arrows_backward(g, 0, 1, generous, config());
        REQUIRE(arrows.size() == 1);
        CHECK(arrows[0].subset.empty());
        CHECK(arrows[0].na_yx.empty());
    }
    SECTION("H = NaYX leaves an empty clique check that passes") {
        auto g = graph_of({"X", "Y", "Z"}, {}, {{0, 1}, {2, 1}, {2, 0}});
        const SemBicScore generous(cov, {1000.0});
        const auto arrows = fgs::calc_arrows_backward(g, 0, 1, generous, config());
        // NaYX = {Z}: candidates H = {} and H = {Z}
        REQUIRE(arrows.size() == 2);
    }
    SECTION("non-clique NaYX \\ H candidates are dropped") {
        // W and Z both undirected to Y and to X, but not adjacent to each other
        auto g = graph_of(var_names(4), {}, {{2, 1}, {3, 1}, {2, 0}, {3, 0}, {0, 1}});
        const SemBicScore generous(cov, {1000.0});
        // NaYX = {W, Z}; H = {} leaves {W, Z} which is not a clique
        for (const auto& a : fgs::calc_arrows_backward(g, 0, 1, generous, config()))
            CHECK_FALSE(a.subset.empty());
    }
    SECTION("adjacency required") {
        auto g = graph_of({"X", "Y", "Z"}, {});
        CHECK_THROWS_AS(fgs::calc_arrows_backward(g, 0, 1, score, config()), std::invalid_argument);
    }
}

TEST_CASE("apply_delete", "[search]") {
    SECTION("lone undirected edge leaves the empty graph") {
        auto g = graph_of({"X", "Y"}, {}, {{0, 1}});
        REQUIRE(fgs::apply_delete(g, {1.0, 0, 1, {}, {}}));
        CHECK(g.edge_count() == 0);
    }
    SECTION("chain keeps its other edge") {
        auto g = graph_of({"X", "Y", "Z"}, {}, {{0, 1}, {1, 2}});
        MixedGraph global = g;
        REQUIRE(fgs::apply_delete(g, {1.0, 0, 1, {}, {}}));
        CHECK(g.has_undirected(1, 2));
        CHECK_FALSE(g.is_adjacent(0, 1));
        // matches the global reversion of the same raw mutation
        global.remove_edge(0, 1);
        fgs::revert_to_cpdag_global(global);
        CHECK(g == global);
    }
    SECTION("H members are oriented away from y, forming the carrying collider") {
        // triangle X--Y--Z--X; deleting X--Y with H = {Z} orients Y->Z and
        // X->Z, and the now-unshielded collider survives reversion
        auto g = graph_of({"X", "Y", "Z"}, {}, {{0, 1}, {1, 2}, {2, 0}});
        MixedGraph global = g;
        REQUIRE(fgs::apply_delete(g, {1.0, 0, 1, {}, {2}}));
        CHECK(g.has_directed(1, 2));
        CHECK(g.has_directed(0, 2));
        global.remove_edge(0, 1);
        global.orient(1, 2);
        global.orient(0, 2);
        fgs::revert_to_cpdag_global(global);
        CHECK(g == global);
    }
    SECTION("no cycle check in the backward direction") {
        // a semi-directed path from y back to x does not block a delete
        auto g = graph_of(var_names(3), {}, {{0, 1}, {1, 2}, {2, 0}});
        CHECK(g.exists_semidirected_path(1, 0));
        CHECK(fgs::apply_delete(g, {1.0, 0, 1, {}, {}}));
    }
    SECTION("edge pointing the wrong way is refused") {
        auto g = graph_of({"X", "Y", "Z"}, {{1, 0}});
        CHECK_FALSE(fgs::apply_delete(g, {1.0, 0, 1, {}, {}}));
    }
}

TEST_CASE("initial effect edges", "[search]") {
    SECTION("independent data at c = 4 yields almost no effect pairs") {
        std::size_t pairs_found = 0;
        std::size_t pairs_total = 0;
        for (int seed = 0; seed < 20; ++seed) {
            fgs::SimConfig sim;
            sim.vars = 30;
            sim.num_edges = 0;
            sim.seed = static_cast<std::uint64_t>(seed);
            const auto data = fgs::draw_samples(fgs::parameterize(fgs::random_forward_dag(sim), sim),
                                                1000, sim.seed);
            const CovarianceSource cov(data);
            const SemBicScore score(cov, {4.0});
            const auto scan = fgs::initial_effect_edges(score, config(4.0));
            pairs_found += scan.pairs.pair_count();
            pairs_total += 30 * 29 / 2;
        }
        CHECK(pairs_found <= pairs_total / 100);
    }
    SECTION("each pair scored once, lower index first") {
        const auto cov = cov_from_model(collider_model(), 800, 21);
        const SemBicScore score(cov, {2.0});
        const auto scan = fgs::initial_effect_edges(score, config());
        std::set<std::pair<int, int>> seen;
        for (const auto& a : scan.seeds) {
            CHECK(a.x < a.y);
            CHECK(seen.emplace(a.x, a.y).second);
        }
    }
    SECTION("seed bumps match direct rescoring and the scan is thread independent") {
        const auto cov = cov_from_model(collider_model(), 800, 21);
        const SemBicScore score(cov, {2.0});
        const auto one = fgs::initial_effect_edges(score, config(2.0, true, 1));
        const auto four = fgs::initial_effect_edges(score, config(2.0, true, 4));
        REQUIRE(one.seeds.size() == four.seeds.size());
        for (std::size_t i = 0; i < one.seeds.size(); ++i) CHECK(one.seeds[i] == four.seeds[i]);
        for (const auto& a : one.seeds)
            CHECK(a.bump == Catch::Approx(*score.score_diff(a.x, a.y, {})).epsilon(1e-12));
    }
}

TEST_CASE("rescore_neighbors refreshes only pairs touching the endpoints", "[search]") {
    const auto names = var_names(5);
    fgs::SimConfig sim;
    sim.vars = 5;
    sim.num_edges = 0;
    sim.seed = 4;
    const CovarianceSource cov(
        fgs::draw_samples(fgs::parameterize(fgs::random_forward_dag(sim), sim), 300, 1));
    const SemBicScore score(cov, {2.0});
    MixedGraph g(names);
    g.add_undirected(0, 1); // the operation just applied at (0, 1)

    ArrowQueue queue;
    const Arrow far{5.0, 2, 3, {}, {}};     // pair touching neither endpoint
    const Arrow stale{7.0, 2, 0, {}, {}};   // pair touching x: must be replaced
    queue.insert(far);
    queue.insert(stale);

    fgs::EffectPairs none(5);
    SECTION("pruning off touches all W pairs") {
        auto cfg = config(2.0, false);
        fgs::rescore_neighbors(g, 0, 1, queue, score, cfg, none, fgs::Phase::forward);
        bool far_kept = false, stale_kept = false;
        for (const auto& a : queue.arrows()) {
            if (a == far) far_kept = true;
            if (a == stale) stale_kept = true;
        }
        CHECK(far_kept);
        CHECK_FALSE(stale_kept);
    }
    SECTION("pruning on skips W without an effect pair") {
        fgs::EffectPairs pairs(5);
        pairs.add(0, 4);
        pairs.finish();
        auto cfg = config(2.0, true);
        fgs::rescore_neighbors(g, 0, 1, queue, score, cfg, pairs, fgs::Phase::forward);
        bool stale_kept = false;
        for (const auto& a : queue.arrows())
            if (a == stale) stale_kept = true;
        CHECK(stale_kept); // W = 2 forms no effect pair with either endpoint
    }
}

TEST_CASE("fgs recovers small generating structures", "[search]") {
    SECTION("two independent columns give the empty pattern") {
        int empty_count = 0;
        for (int seed = 0; seed < 100; ++seed) {
            fgs::SimConfig sim;
            sim.vars = 2;
            sim.num_edges = 0;
            sim.seed = static_cast<std::uint64_t>(seed);
            const auto cov = CovarianceSource(
                fgs::draw_samples(fgs::parameterize(fgs::random_forward_dag(sim), sim), 1000,
                                  sim.seed));
            if (fgs::fgs(cov, config()).edge_count() == 0) ++empty_count;
        }
        CHECK(empty_count >= 95);
    }
    SECTION("single edge model gives X --- Y") {
        const auto cov = cov_from_model(single_edge_model(), 1000, 5);
        const MixedGraph pattern = fgs::fgs(cov, config());
        CHECK(pattern.edge_count() == 1);
        CHECK(pattern.has_undirected(0, 1));
    }
    SECTION("collider model recovers the v-structure") {
        const auto cov = cov_from_model(collider_model(), 1000, 6);
        const MixedGraph pattern = fgs::fgs(cov, config());
        CHECK(pattern.has_directed(0, 1));
        CHECK(pattern.has_directed(2, 1));
        CHECK_FALSE(pattern.is_adjacent(0, 2));
    }
}

TEST_CASE("total score increases with every applied operator", "[search]") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 5; ++trial) {
        fgs::SimConfig sim;
        sim.vars = 15;
        sim.seed = rng();
        const auto cov = CovarianceSource(
            fgs::draw_samples(fgs::parameterize(fgs::random_forward_dag(sim), sim), 500, sim.seed));
        SemBicScore score(cov, {2.0});
        fgs::Fgs search(cov, config());
        double last = total_score(MixedGraph(cov.names()), score);
        int steps = 0;
        search.on_step = [&](const MixedGraph& g) {
            const double now = total_score(g, score);
            CHECK(now > last);
            last = now;
            ++steps;
        };
        search.run();
        CHECK(steps > 0);
    }
}

TEST_CASE("search output is identical across thread counts", "[search]") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        fgs::SimConfig sim;
        sim.vars = 30;
        sim.seed = seed;
        const auto cov = CovarianceSource(
            fgs::draw_samples(fgs::parameterize(fgs::random_forward_dag(sim), sim), 500, seed));
        const MixedGraph a = fgs::fgs(cov, config(2.0, true, 1));
        const MixedGraph b = fgs::fgs(cov, config(2.0, true, 4));
        REQUIRE(a == b);
    }
}

TEST_CASE("fgs agrees with exhaustive enumeration on small problems", "[search]") {
    int matches = 0;
    for (int trial = 0; trial < 20; ++trial) {
        fgs::SimConfig sim;
        sim.vars = 4;
        sim.num_edges = 4;
        sim.seed = 8800 + static_cast<std::uint64_t>(trial);
        const auto cov = CovarianceSource(
            fgs::draw_samples(fgs::parameterize(fgs::random_forward_dag(sim), sim), 5000, sim.seed));
        const SemBicScore score(cov, {2.0});
        const MixedGraph got = fgs::fgs(cov, config());
        const MixedGraph best = oracles::best_pattern_by_enumeration(var_names(4), score);
        if (got == best) ++matches;
    }
    CHECK(matches >= 16);
}

TEST_CASE("effect edge pruning changes eligibility, not validity", "[search]") {
    // same model searched with and without pruning: both must satisfy the
    // pattern invariants; with strong signal they agree exactly
    const auto cov = cov_from_model(collider_model(), 3000, 9);
    const MixedGraph with = fgs::fgs(cov, config(2.0, true));
    const MixedGraph without = fgs::fgs(cov, config(2.0, false));
    CHECK(with == without);
}
