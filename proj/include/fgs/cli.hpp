#pragma once

#include "fgs/dataset.hpp"
#include "fgs/graph_io.hpp"
#include "fgs/metrics.hpp"
#include "fgs/search.hpp"
#include "fgs/simulate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fgs::cli {

// exit codes: 0 success, 1 runtime or I/O error, 2 usage error
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

inline int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Everything needed to replay a run: the subcommand, all resolved
/// parameters, and the file paths involved. Serialized next to every output.
struct RunManifest {
    std::string subcommand;
    nlohmann::ordered_json parameters;
    nlohmann::ordered_json paths;
    std::optional<double> wall_ms;

    std::string to_json() const {
        nlohmann::ordered_json j;
        j["subcommand"] = subcommand;
        j["parameters"] = parameters;
        j["paths"] = paths;
        if (wall_ms) j["wall_ms"] = *wall_ms;
        return j.dump(2) + "\n";
    }
};

namespace detail {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        const auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

/// Builds both graphs over the shared node universe. The edge-list file
/// format cannot carry isolated nodes, so the universe is the union of the
/// names seen in either file.
inline std::pair<MixedGraph, MixedGraph> align_node_sets(const MixedGraph& a,
                                                         const MixedGraph& b) {
    std::vector<std::string> names = a.names();
    for (const auto& name : b.names())
        if (a.index_of(name) < 0) names.push_back(name);
    auto rebuild = [&names](const MixedGraph& g) {
        MixedGraph out(names);
        for (const Edge& e : g.edges()) {
            const int from = out.index_of(g.name(e.from));
            const int to = out.index_of(g.name(e.to));
            e.directed ? out.add_directed(from, to) : out.add_undirected(from, to);
        }
        return out;
    };
    return {rebuild(a), rebuild(b)};
}

struct SearchFlags {
    double penalty_discount = 2.0;
    int threads = default_threads();
    bool no_pruning = false;
    int max_subset_size = -1; // <0 means unbounded

    SearchConfig to_config() const {
        SearchConfig cfg;
        cfg.score.penalty_discount = penalty_discount;
        cfg.effect_edge_pruning = !no_pruning;
        if (max_subset_size >= 0) cfg.max_subset_size = max_subset_size;
        cfg.threads = threads;
        return cfg;
    }

    void register_flags(CLI::App* cmd) {
        cmd->add_option("--penalty-discount", penalty_discount,
                        "BIC penalty discount c (default 2)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--no-effect-edge-pruning", no_pruning,
                      "score all pairs instead of only effect pairs");
        cmd->add_option("--max-subset-size", max_subset_size,
                        "cap on enumerated conditioning subsets (unbounded if omitted)");
    }

    void fill(nlohmann::ordered_json& parameters) const {
        parameters["penalty_discount"] = penalty_discount;
        parameters["threads"] = threads;
        parameters["effect_edge_pruning"] = !no_pruning;
        if (max_subset_size >= 0)
            parameters["max_subset_size"] = max_subset_size;
        else
            parameters["max_subset_size"] = nullptr;
    }
};

inline void write_outputs(const std::string& out_dir,
                          const std::vector<std::pair<std::string, std::string>>& files) {
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, content] : files)
        write_text_file((std::filesystem::path(out_dir) / name).string(), content);
}

} // namespace detail

inline int run_simulate(const SimConfig& cfg, const std::string& out_dir, std::ostream& err) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        const MixedGraph dag = random_forward_dag(cfg);
        const SemModel model = parameterize(dag, cfg);
        const Dataset data = draw_samples(model, cfg.samples, cfg.seed);
        MixedGraph pattern = dag;
        revert_to_cpdag_global(pattern);

        RunManifest manifest;
        manifest.subcommand = "simulate";
        manifest.parameters = {{"vars", cfg.vars},
                               {"edges", cfg.edges()},
                               {"samples", cfg.samples},
                               {"seed", cfg.seed}};
        manifest.paths = {{"out_dir", out_dir},
                          {"data", "data.tsv"},
                          {"true_dag", "true_dag.txt"},
                          {"true_pattern", "true_pattern.txt"}};
        // no wall clock here: simulate outputs are byte-reproducible

        detail::write_outputs(out_dir, {{"data.tsv", dataset_to_tsv(data)},
                                        {"true_dag.txt", graph_to_text(dag)},
                                        {"true_pattern.txt", graph_to_text(pattern)},
                                        {"manifest.json", manifest.to_json()}});
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int run_search(const std::string& in_path, const std::string& out_dir,
                      const detail::SearchFlags& flags, std::ostream& err) {
    SearchConfig cfg = flags.to_config();
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        const Dataset data = read_dataset(in_path);
        const CovarianceSource cov(data);
        detail::Stopwatch watch;
        const MixedGraph pattern = fgs(cov, cfg);
        const double elapsed = watch.ms();

        RunManifest manifest;
        manifest.subcommand = "search";
        flags.fill(manifest.parameters);
        manifest.paths = {{"in", in_path}, {"out_dir", out_dir}, {"pattern", "pattern.txt"}};
        manifest.wall_ms = elapsed;

        detail::write_outputs(out_dir, {{"pattern.txt", graph_to_text(pattern)},
                                        {"manifest.json", manifest.to_json()}});
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int run_eval(const std::string& estimated_path, const std::string& truth_path,
                    double time_value, std::ostream& out, std::ostream& err) {
    try {
        std::ifstream est_in(estimated_path), truth_in(truth_path);
        if (!est_in) throw std::runtime_error("cannot open " + estimated_path);
        if (!truth_in) throw std::runtime_error("cannot open " + truth_path);
        std::ostringstream est_buf, truth_buf;
        est_buf << est_in.rdbuf();
        truth_buf << truth_in.rdbuf();

        const MixedGraph estimated = graph_from_text(est_buf.str());
        MixedGraph truth = graph_from_text(truth_buf.str());
        // an all-directed truth file is taken to be the generating DAG and is
        // reduced to its pattern; mixed files are compared as given
        if (truth.undirected_edge_count() == 0 && truth.directed_edge_count() > 0)
            revert_to_cpdag_global(truth);

        auto [est_aligned, truth_aligned] = detail::align_node_sets(estimated, truth);
        const ComparisonStats stats = compare_patterns(est_aligned, truth_aligned);
        out << stats_row(truth_aligned.node_count(), time_value, stats) << '\n';
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

inline int run_bench(const std::vector<int>& vars_list, int repeats, std::uint64_t seed,
                     int samples, const detail::SearchFlags& flags,
                     const std::string& out_dir, std::ostream& out, std::ostream& err) {
    if (repeats < 1) {
        err << "error: --repeats must be >= 1\n";
        return kUsageError;
    }
    SearchConfig cfg = flags.to_config();
    try {
        cfg.validate();
        for (int vars : vars_list)
            if (vars < 2) throw std::invalid_argument("--vars-list entries must be >= 2");
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsageError;
    }
    try {
        std::string table;
        for (int vars : vars_list) {
            ComparisonStats sum;
            double total_ms = 0.0;
            double adj_p = 0, adj_r = 0, arr_p = 0, arr_r = 0;
            for (int rep = 0; rep < repeats; ++rep) {
                SimConfig sim;
                sim.vars = vars;
                sim.samples = samples;
                sim.seed = seed + static_cast<std::uint64_t>(rep);
                const MixedGraph dag = random_forward_dag(sim);
                const SemModel model = parameterize(dag, sim);
                // round-trip through the TSV form so results match the
                // simulate -> search -> eval file pipeline exactly
                const Dataset data =
                    dataset_from_tsv(dataset_to_tsv(draw_samples(model, sim.samples, sim.seed)));
                const CovarianceSource cov(data);
                detail::Stopwatch watch;
                const MixedGraph estimated = fgs(cov, cfg);
                total_ms += watch.ms();
                MixedGraph truth = dag;
                revert_to_cpdag_global(truth);
                const ComparisonStats s = compare_patterns(estimated, truth);
                adj_p += s.adj_precision;
                adj_r += s.adj_recall;
                arr_p += s.arrow_precision;
                arr_r += s.arrow_recall;
            }
            ComparisonStats avg;
            avg.adj_precision = adj_p / repeats;
            avg.adj_recall = adj_r / repeats;
            avg.arrow_precision = arr_p / repeats;
            avg.arrow_recall = arr_r / repeats;
            const double minutes = total_ms / repeats / 60000.0;
            const std::string row = stats_row(vars, minutes, avg);
            out << row << '\n';
            table += row + '\n';
        }
        if (!out_dir.empty()) {
            RunManifest manifest;
            manifest.subcommand = "bench";
            manifest.parameters = {{"vars_list", vars_list},
                                   {"repeats", repeats},
                                   {"samples", samples},
                                   {"seed", seed}};
            flags.fill(manifest.parameters);
            manifest.paths = {{"out_dir", out_dir}, {"table", "table.tsv"}};
            detail::write_outputs(out_dir,
                                  {{"table.tsv", table}, {"manifest.json", manifest.to_json()}});
        }
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}

/// Entry point shared by the binary and the tests.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fast greedy search for linear-Gaussian causal structure"};
    app.name("fgs");
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "generate a random SEM and draw samples");
    SimConfig sim;
    std::string sim_out = ".";
    sim_cmd->add_option("--vars", sim.vars, "variable count")->required()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--edges", sim.num_edges, "edge count (default: same as --vars)");
    sim_cmd->add_option("--samples", sim.samples, "sample count (default 1000)");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--out-dir", sim_out, "output directory");

    // search
    auto* search_cmd = app.add_subcommand("search", "run the greedy pattern search on a dataset");
    std::string search_in;
    std::string search_out = ".";
    detail::SearchFlags search_flags;
    search_cmd->add_option("--in", search_in, "input dataset (TSV)")->required();
    search_cmd->add_option("--out-dir", search_out, "output directory");
    search_flags.register_flags(search_cmd);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "compare an estimated pattern with the truth");
    std::string eval_est, eval_truth;
    double eval_time_ms = 0.0;
    eval_cmd->add_option("--estimated", eval_est, "estimated pattern file")->required();
    eval_cmd->add_option("--truth", eval_truth, "true pattern (or DAG) file")->required();
    eval_cmd->add_option("--time-ms", eval_time_ms, "time column value (default 0)");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "simulate/search/eval over a size list");
    std::vector<int> bench_vars;
    int bench_repeats = 1;
    std::uint64_t bench_seed = 0;
    int bench_samples = 1000;
    std::string bench_out;
    detail::SearchFlags bench_flags;
    bench_cmd->add_option("--vars-list", bench_vars, "comma-separated sizes, e.g. 100,500,1000")
        ->required()
        ->delimiter(',');
    bench_cmd->add_option("--repeats", bench_repeats, "runs per size")->required();
    bench_cmd->add_option("--seed", bench_seed, "base seed; repeat i uses seed+i");
    bench_cmd->add_option("--samples", bench_samples, "sample count (default 1000)");
    bench_cmd->add_option("--out-dir", bench_out, "optional directory for table + manifest");
    bench_flags.register_flags(bench_cmd);

    try {
        std::reverse(args.begin(), args.end()); // CLI11 consumes from the back
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kUsageError;
    }

    if (sim_cmd->parsed()) return run_simulate(sim, sim_out, err);
    if (search_cmd->parsed()) return run_search(search_in, search_out, search_flags, err);
    if (eval_cmd->parsed()) return run_eval(eval_est, eval_truth, eval_time_ms, out, err);
    return run_bench(bench_vars, bench_repeats, bench_seed, bench_samples, bench_flags, bench_out,
                     out, err);
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args), out, err);
}

} // namespace fgs::cli
