#pragma once

#include "okb/basis.hpp"
#include "okb/environments.hpp"

#include <iosfwd>
#include <map>
#include <string>

namespace okb {

// Parsed `key = value` experiment description.
struct ExperimentConfig {
    std::string environment;
    std::map<std::string, std::string> env_params;
    std::string method;  // okb | okb-uniform | sfols
    std::vector<std::uint64_t> seeds;
    int d = 2;
    int test_grid_H = 20;
    int chord_H = 8;
    bool chord_signed = true;
    double tol = 1e-9;
    int max_iters = 20;
    int okls_iters = 5;
    std::string output_dir;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Environment registry: counterexample, item_grid, random_mcp, two_corridor.
BuiltEnv build_environment(const std::string& name,
                           const std::map<std::string, std::string>& params, int expected_d);

struct EvalRow {
    std::string method;
    std::uint64_t seed = 0;
    int iteration = 0;
    Eigen::VectorXd w;
    double raw = 0.0;
    double norm = 0.0;
    double opt = 0.0;
};

enum class EvalMode { ok, gpi };

// Zero-shot evaluation on a weight grid: each unseen weight is registered in
// the meta-policy (pure computation, no new base policies) and the induced
// flat policy evaluated exactly. gpi mode fixes the chord to the task weight.
std::vector<EvalRow> evaluate_zero_shot(const TabularMCP& mcp, const FeatureMap& features,
                                        const std::vector<SFRecord>& basis, MetaPolicy* meta,
                                        int basis_version,
                                        const std::vector<Eigen::VectorXd>& test_weights,
                                        const std::vector<double>& optimal_values, EvalMode mode,
                                        const std::string& method, std::uint64_t seed,
                                        int iteration, double tol = 1e-9);
std::vector<EvalRow> evaluate_zero_shot(BasisResult& result, const std::vector<Eigen::VectorXd>& test_weights,
                                        const TabularMCP& mcp, const FeatureMap& features,
                                        EvalMode mode = EvalMode::ok);

// Per-task normalization: (raw - min observed) / (max observed - min), where
// the oracle optimum counts as observed on the max side.
void normalize_rows(std::vector<EvalRow>& rows);

void write_eval_csv(std::ostream& os, const std::vector<EvalRow>& rows, int d);
std::vector<EvalRow> read_eval_csv(const std::string& path);

// Runs the configured method for every seed, evaluating zero-shot after each
// iteration; writes per-seed CSV, JSON-lines iteration log and a text
// snapshot. Returns the output directory.
std::string run_experiment(const ExperimentConfig& config);

struct CompareRow {
    std::string method;
    int iteration = 0;
    double mean = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    int n_seeds = 0;
};
struct CompareReport {
    std::vector<CompareRow> rows;
    std::string text_table;
    std::string csv;
};

// Mean normalized return with a deterministic bootstrapped 95% CI over seeds,
// per (method, iteration).
CompareReport compare_report(const std::vector<std::string>& csv_paths,
                             std::uint64_t bootstrap_seed = 12345, int bootstrap_samples = 2000);

// Versioned text snapshot of a basis-construction run (policies as action
// tables, vectors as decimal text) together with the environment that
// produced it.
void write_snapshot(std::ostream& os, const ExperimentConfig& config, const BasisResult& result);
struct Snapshot {
    ExperimentConfig config;
    BuiltEnv env;
    BasisResult result;
};
Snapshot read_snapshot(const std::string& path);

void write_chord_trajectory_csv(std::ostream& os, const std::vector<ChordStep>& steps, int d);

// The inexpressibility demonstration on the four-arm MDP: chord sweep, the
// keyboard's shortfall on the state-dependent task, and the advantage witness.
struct CounterexampleDemo {
    int swept_chords = 0;
    int a4_selected = 0;
    double optimal_value = 0.0;
    double keyboard_value = 0.0;
    double witness_advantage = 0.0;
    bool witness_flagged = false;
    bool pass_sweep = false;
    bool pass_gap = false;
    bool pass_witness = false;
    bool all_pass() const { return pass_sweep && pass_gap && pass_witness; }
};
CounterexampleDemo run_counterexample_demo(int sweep_points = 20000, int chord_H = 16);

} // namespace okb
