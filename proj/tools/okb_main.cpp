#include "okb/harness.hpp"

#include "okb/errors.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

int cmd_run(const std::string& config_path) {
    const okb::ExperimentConfig config = okb::parse_config_file(config_path);
    const std::string out = okb::run_experiment(config);
    std::cout << "wrote results under " << out << "\n";
    return 0;
}

int cmd_eval(const std::string& snapshot_path, int grid_H, bool gpi_mode,
             const std::string& out_path, const std::string& trace_path, int trace_weight,
             std::uint64_t trace_seed) {
    okb::Snapshot snap = okb::read_snapshot(snapshot_path);
    const auto weights = okb::simplex_grid(snap.config.d, grid_H);

    auto rows = okb::evaluate_zero_shot(snap.result, weights, snap.env.mcp, snap.env.features,
                                        gpi_mode ? okb::EvalMode::gpi : okb::EvalMode::ok);
    if (out_path.empty()) {
        okb::write_eval_csv(std::cout, rows, snap.config.d);
    } else {
        std::ofstream out(out_path);
        if (!out) throw okb::ConfigError("eval: cannot write " + out_path);
        okb::write_eval_csv(out, rows, snap.config.d);
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    }

    if (!trace_path.empty()) {
        if (trace_weight < 0 || trace_weight >= static_cast<int>(weights.size()))
            throw okb::ConfigError("eval: --trace-weight out of range");
        okb::TaskWeight task{weights[static_cast<std::size_t>(trace_weight)], okb::TaskKind::convex};
        const int tid = okb::register_linear_task(snap.env.mcp, snap.env.features, snap.result.basis,
                                                  snap.result.meta, task, snap.config.tol,
                                                  snap.result.basis_version);
        const auto steps = okb::chord_trajectory(snap.env.mcp, snap.result.basis, snap.result.meta,
                                                 tid, 500, trace_seed);
        std::ofstream out(trace_path);
        if (!out) throw okb::ConfigError("eval: cannot write " + trace_path);
        okb::write_chord_trajectory_csv(out, steps, snap.config.d);
        std::cout << "wrote " << steps.size() << " trajectory steps to " << trace_path << "\n";
    }
    return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::string& out_path) {
    const okb::CompareReport report = okb::compare_report(paths);
    std::cout << report.text_table;
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) throw okb::ConfigError("compare: cannot write " + out_path);
        out << report.csv;
        std::cout << "wrote summary to " << out_path << "\n";
    }
    return 0;
}

int cmd_demo(const std::string& which) {
    if (which != "counterexample") throw okb::ConfigError("demo: unknown demo '" + which + "'");
    const okb::CounterexampleDemo demo = okb::run_counterexample_demo();
    std::cout << (demo.pass_sweep ? "PASS" : "FAIL") << " sweep: arm a4 selected for "
              << demo.a4_selected << " of " << demo.swept_chords << " unit chords\n";
    std::cout << (demo.pass_gap ? "PASS" : "FAIL")
              << " gap: keyboard value " << demo.keyboard_value << " vs optimal "
              << demo.optimal_value << " on the state-dependent task\n";
    std::cout << (demo.pass_witness ? "PASS" : "FAIL") << " witness: advantage at (s0, a4) = "
              << demo.witness_advantage << "\n";
    if (!demo.all_pass()) throw okb::NumericError("counterexample demo failed");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular successor-feature planning with option-keyboard basis construction"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Config file")->required();

    std::string snapshot_path, eval_out, trace_path;
    int grid_H = 20, trace_weight = 0;
    std::uint64_t trace_seed = 0;
    bool gpi_mode = false;
    auto* eval = app.add_subcommand("eval", "Zero-shot evaluation of a snapshot on a weight grid");
    eval->add_option("snapshot", snapshot_path, "Snapshot file")->required();
    eval->add_option("--grid", grid_H, "Simplex grid resolution H");
    eval->add_flag("--gpi", gpi_mode, "Fix the chord to the task weight (GPI ablation)");
    eval->add_option("--out", eval_out, "Write rows to this CSV instead of stdout");
    eval->add_option("--trace", trace_path, "Write a chord trajectory CSV");
    eval->add_option("--trace-weight", trace_weight, "Grid index of the traced weight");
    eval->add_option("--trace-seed", trace_seed, "Rollout seed for the trace");

    std::vector<std::string> compare_paths;
    std::string compare_out;
    auto* compare = app.add_subcommand("compare", "Summarize eval CSVs per method and iteration");
    compare->add_option("csv", compare_paths, "Eval CSV files")->required()->expected(-1);
    compare->add_option("--out", compare_out, "Write the summary CSV here");

    std::string demo_which;
    auto* demo = app.add_subcommand("demo", "Built-in demonstrations");
    demo->add_option("which", demo_which, "Demo name (counterexample)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) return cmd_run(config_path);
        if (*eval)
            return cmd_eval(snapshot_path, grid_H, gpi_mode, eval_out, trace_path, trace_weight,
                            trace_seed);
        if (*compare) return cmd_compare(compare_paths, compare_out);
        if (*demo) return cmd_demo(demo_which);
    } catch (const okb::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
