#include "okb/harness.hpp"

#include "okb/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

namespace okb {

namespace {

std::string fmt(double x, const char* spec = "%.12g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, x);
    return buf;
}

std::string fmt17(double x) { return fmt(x, "%.17g"); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

int to_int(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + s + "'");
    }
}

double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + s + "'");
    }
}

std::uint64_t to_u64(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: bad seed for " + key + ": '" + s + "'");
    }
}

bool to_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + s + "'");
}

int env_int(const std::map<std::string, std::string>& params, const std::string& key, int fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : to_int(it->second, "env." + key);
}

double env_double(const std::map<std::string, std::string>& params, const std::string& key,
                  double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : to_double(it->second, "env." + key);
}

bool env_bool(const std::map<std::string, std::string>& params, const std::string& key, bool fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : to_bool(it->second, "env." + key);
}

std::uint64_t env_seed(const std::map<std::string, std::string>& params, std::uint64_t fallback) {
    const auto it = params.find("seed");
    return it == params.end() ? fallback : to_u64(it->second, "env.seed");
}

void check_env_keys(const std::map<std::string, std::string>& params,
                    std::initializer_list<const char*> allowed, const std::string& env) {
    for (const auto& [key, value] : params) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ConfigError("config: unknown parameter env." + key + " for environment " + env);
    }
}

int threads_from_env() {
    const char* raw = std::getenv("OKB_THREADS");
    if (!raw) return 1;
    const int n = std::atoi(raw);
    return n < 1 ? 1 : n;
}

std::vector<long long> weight_key(const Eigen::VectorXd& w) {
    std::vector<long long> key(static_cast<std::size_t>(w.size()));
    for (Eigen::Index i = 0; i < w.size(); ++i)
        key[static_cast<std::size_t>(i)] = std::llround(w[i] * 1e9);
    return key;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    bool saw_env = false, saw_method = false, saw_out = false, saw_chord_H = false;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");

        if (key.rfind("env.", 0) == 0) {
            cfg.env_params[key.substr(4)] = value;
        } else if (key == "environment") {
            cfg.environment = value;
            saw_env = true;
        } else if (key == "method") {
            cfg.method = value;
            saw_method = true;
        } else if (key == "seeds") {
            cfg.seeds.clear();
            for (const auto& part : split(value, ','))
                cfg.seeds.push_back(to_u64(trim(part), "seeds"));
        } else if (key == "d") {
            cfg.d = to_int(value, key);
        } else if (key == "test_grid_H") {
            cfg.test_grid_H = to_int(value, key);
        } else if (key == "chord_H") {
            cfg.chord_H = to_int(value, key);
            saw_chord_H = true;
        } else if (key == "chord_signed") {
            cfg.chord_signed = to_bool(value, key);
        } else if (key == "tol") {
            cfg.tol = to_double(value, key);
        } else if (key == "max_iters") {
            cfg.max_iters = to_int(value, key);
        } else if (key == "okls_iters") {
            cfg.okls_iters = to_int(value, key);
        } else if (key == "output_dir") {
            cfg.output_dir = value;
            saw_out = true;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (!saw_env) throw ConfigError("config: missing 'environment'");
    if (!saw_method) throw ConfigError("config: missing 'method'");
    if (!saw_out) throw ConfigError("config: missing 'output_dir'");
    if (cfg.seeds.empty()) throw ConfigError("config: 'seeds' must list at least one seed");
    if (cfg.method != "okb" && cfg.method != "okb-uniform" && cfg.method != "sfols")
        throw ConfigError("config: unknown method '" + cfg.method + "'");
    if (!saw_chord_H) cfg.chord_H = cfg.d <= 3 ? 8 : 4;
    if (cfg.test_grid_H < 1 || cfg.chord_H < 1 || cfg.max_iters < 1 || cfg.okls_iters < 1)
        throw ConfigError("config: grid sizes and iteration caps must be >= 1");
    if (cfg.tol <= 0.0) throw ConfigError("config: tol must be positive");
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

BuiltEnv build_environment(const std::string& name,
                           const std::map<std::string, std::string>& params, int expected_d) {
    BuiltEnv env;
    if (name == "counterexample") {
        check_env_keys(params, {"gamma"}, name);
        env = build_counterexample(env_double(params, "gamma", 0.9));
    } else if (name == "item_grid") {
        check_env_keys(params, {"width", "height", "items_per_type", "toroidal", "seed", "gamma"}, name);
        env = build_item_grid(env_int(params, "width", 3), env_int(params, "height", 3),
                              env_int(params, "items_per_type", 2), env_bool(params, "toroidal", true),
                              env_seed(params, 0), env_double(params, "gamma", 0.95));
    } else if (name == "random_mcp") {
        check_env_keys(params, {"n_states", "n_actions", "d", "branching", "seed", "gamma"}, name);
        env = build_random_mcp(env_seed(params, 0), env_int(params, "n_states", 12),
                               env_int(params, "n_actions", 3), env_int(params, "d", 2),
                               env_double(params, "gamma", 0.9), env_int(params, "branching", 2));
    } else if (name == "two_corridor") {
        check_env_keys(params, {"length", "gamma"}, name);
        env = build_two_corridor(env_int(params, "length", 2), env_double(params, "gamma", 0.95));
    } else {
        throw ConfigError("unknown environment '" + name + "'");
    }
    if (env.features.dim != expected_d)
        throw ConfigError("config: d = " + std::to_string(expected_d) + " but environment '" + name +
                          "' has d = " + std::to_string(env.features.dim));
    return env;
}

std::vector<EvalRow> evaluate_zero_shot(const TabularMCP& mcp, const FeatureMap& features,
                                        const std::vector<SFRecord>& basis, MetaPolicy* meta,
                                        int basis_version,
                                        const std::vector<Eigen::VectorXd>& test_weights,
                                        const std::vector<double>& optimal_values, EvalMode mode,
                                        const std::string& method, std::uint64_t seed,
                                        int iteration, double tol) {
    if (test_weights.size() != optimal_values.size())
        throw std::invalid_argument("evaluate_zero_shot: oracle values size mismatch");
    std::vector<EvalRow> rows;
    rows.reserve(test_weights.size());
    for (std::size_t i = 0; i < test_weights.size(); ++i) {
        TaskWeight task{test_weights[i], TaskKind::convex};
        const RewardTable reward = task_reward(features, task);
        double raw = 0.0;
        if (mode == EvalMode::ok && meta != nullptr) {
            const int tid =
                register_linear_task(mcp, features, basis, *meta, task, tol, basis_version);
            raw = meta->tasks[static_cast<std::size_t>(tid)].value;
        } else {
            raw = evaluate_flat_policy(mcp, reward, gpi_flat_policy(mcp, basis, task.w)).v_mu;
        }
        EvalRow row;
        row.method = method;
        row.seed = seed;
        row.iteration = iteration;
        row.w = test_weights[i];
        row.raw = raw;
        row.opt = optimal_values[i];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<EvalRow> evaluate_zero_shot(BasisResult& result,
                                        const std::vector<Eigen::VectorXd>& test_weights,
                                        const TabularMCP& mcp, const FeatureMap& features,
                                        EvalMode mode) {
    std::vector<double> optimal;
    optimal.reserve(test_weights.size());
    for (const auto& w : test_weights) {
        TaskWeight task{w, TaskKind::convex};
        optimal.push_back(solve_task(mcp, task_reward(features, task)).v_mu);
    }
    auto rows = evaluate_zero_shot(mcp, features, result.basis, &result.meta, result.basis_version,
                                   test_weights, optimal, mode, "okb", 0, result.iterations);
    normalize_rows(rows);
    return rows;
}

void normalize_rows(std::vector<EvalRow>& rows) {
    std::map<std::vector<long long>, std::pair<double, double>> span;  // min raw, max(raw, opt)
    for (const auto& row : rows) {
        const auto key = weight_key(row.w);
        const auto it = span.find(key);
        const double hi = std::max(row.raw, row.opt);
        if (it == span.end()) {
            span[key] = {row.raw, hi};
        } else {
            it->second.first = std::min(it->second.first, row.raw);
            it->second.second = std::max(it->second.second, hi);
        }
    }
    for (auto& row : rows) {
        const auto& [lo, hi] = span[weight_key(row.w)];
        row.norm = hi - lo < 1e-15 ? 1.0 : (row.raw - lo) / (hi - lo);
    }
}

void write_eval_csv(std::ostream& os, const std::vector<EvalRow>& rows, int d) {
    os << "method,seed,iteration";
    for (int i = 0; i < d; ++i) os << ",w_" << i;
    os << ",raw_return,norm_return,opt_return\n";
    for (const auto& row : rows) {
        os << row.method << ',' << row.seed << ',' << row.iteration;
        for (int i = 0; i < d; ++i) os << ',' << fmt(row.w[i]);
        os << ',' << fmt(row.raw) << ',' << fmt(row.norm) << ',' << fmt(row.opt) << '\n';
    }
}

std::vector<EvalRow> read_eval_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("compare: cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw ConfigError("compare: empty file " + path);
    const auto cols = split(trim(header), ',');
    if (cols.size() < 6 || cols[0] != "method" || cols[1] != "seed" || cols[2] != "iteration")
        throw ConfigError("compare: unexpected header in " + path);
    const int d = static_cast<int>(cols.size()) - 6;
    for (int i = 0; i < d; ++i)
        if (cols[static_cast<std::size_t>(3 + i)] != "w_" + std::to_string(i))
            throw ConfigError("compare: unexpected header in " + path);

    std::vector<EvalRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto parts = split(trim(line), ',');
        if (parts.size() != cols.size()) throw ConfigError("compare: ragged row in " + path);
        EvalRow row;
        row.method = parts[0];
        row.seed = to_u64(parts[1], "seed");
        row.iteration = to_int(parts[2], "iteration");
        row.w.resize(d);
        for (int i = 0; i < d; ++i) row.w[i] = to_double(parts[static_cast<std::size_t>(3 + i)], "w");
        row.raw = to_double(parts[cols.size() - 3], "raw_return");
        row.norm = to_double(parts[cols.size() - 2], "norm_return");
        row.opt = to_double(parts[cols.size() - 1], "opt_return");
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

nlohmann::json weight_json(const Eigen::VectorXd& w) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < w.size(); ++i) arr.push_back(w[i]);
    return arr;
}

void write_iteration_log(std::ostream& os, const std::vector<IterationLog>& log) {
    for (const auto& entry : log) {
        nlohmann::json j;
        j["iter"] = entry.iter;
        j["n_basis"] = entry.n_basis;
        j["n_support"] = entry.n_support;
        j["selected_w"] = entry.selected_w ? weight_json(*entry.selected_w) : nlohmann::json();
        nlohmann::json cands = nlohmann::json::array();
        for (const auto& c : entry.candidates) cands.push_back(weight_json(c));
        j["candidates"] = cands;
        nlohmann::json corners = nlohmann::json::array();
        for (const auto& c : entry.corners) corners.push_back(weight_json(c));
        j["corners"] = corners;
        j["corner_deltas"] = entry.corner_deltas;
        j["max_delta"] = entry.max_delta;
        j["policy_solves"] = entry.policy_solves;
        j["meta_trainings"] = entry.meta_trainings;
        j["oracle_solves"] = entry.oracle_solves;
        os << j.dump() << '\n';
    }
}

struct SeedCell {
    std::vector<EvalRow> rows;
    std::vector<IterationLog> log;
    BasisResult okb_result;        // when method is okb / okb-uniform
    SfolsResult sfols_result;      // when method is sfols
    bool is_okb = false;
};

SeedCell run_seed_cell(const ExperimentConfig& config, const BuiltEnv& env,
                       const std::vector<Eigen::VectorXd>& test_weights,
                       const std::vector<double>& optimal, std::uint64_t seed) {
    OkbConfig run_cfg;
    run_cfg.chords.chords = chord_grid(config.d, config.chord_H, config.chord_signed);
    run_cfg.tol = config.tol;
    run_cfg.max_iters = config.max_iters;
    run_cfg.okls_iters = config.okls_iters;
    run_cfg.selection = config.method == "okb-uniform" ? OkbConfig::Selection::uniform
                                                       : OkbConfig::Selection::advantage;
    run_cfg.seed = seed;

    SeedCell cell;
    cell.is_okb = config.method != "sfols";
    const auto observer = [&](const IterationView& view) {
        std::vector<EvalRow> rows;
        if (view.meta != nullptr) {
            MetaPolicy scratch = *view.meta;  // keep the run's registry clean
            rows = evaluate_zero_shot(env.mcp, env.features, view.basis, &scratch,
                                      view.basis_version, test_weights, optimal, EvalMode::ok,
                                      config.method, seed, view.iteration, config.tol);
        } else {
            rows = evaluate_zero_shot(env.mcp, env.features, view.basis, nullptr,
                                      view.basis_version, test_weights, optimal, EvalMode::gpi,
                                      config.method, seed, view.iteration, config.tol);
        }
        cell.rows.insert(cell.rows.end(), rows.begin(), rows.end());
    };

    if (cell.is_okb) {
        cell.okb_result = okb_run(env.mcp, env.features, run_cfg, observer);
        cell.log = cell.okb_result.log;
    } else {
        cell.sfols_result = sfols_run(env.mcp, env.features, run_cfg, observer);
        cell.log = cell.sfols_result.log;
    }
    return cell;
}

} // namespace

std::string run_experiment(const ExperimentConfig& config) {
    if (config.output_dir.empty()) throw ConfigError("run_experiment: empty output_dir");
    const BuiltEnv env = build_environment(config.environment, config.env_params, config.d);

    const auto test_weights = simplex_grid(config.d, config.test_grid_H);
    std::vector<double> optimal;
    optimal.reserve(test_weights.size());
    for (const auto& w : test_weights) {
        TaskWeight task{w, TaskKind::convex};
        optimal.push_back(solve_task(env.mcp, task_reward(env.features, task)).v_mu);
    }

    std::vector<SeedCell> cells(config.seeds.size());
    const int threads = std::min<int>(threads_from_env(), static_cast<int>(config.seeds.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < config.seeds.size(); ++i)
            cells[i] = run_seed_cell(config, env, test_weights, optimal, config.seeds[i]);
    } else {
        std::atomic<std::size_t> cursor{0};
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (std::size_t i = cursor.fetch_add(1); i < config.seeds.size();
                     i = cursor.fetch_add(1)) {
                    try {
                        cells[i] = run_seed_cell(config, env, test_weights, optimal, config.seeds[i]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    // Normalization pools every row of this run per task.
    std::vector<EvalRow> all_rows;
    for (const auto& cell : cells) all_rows.insert(all_rows.end(), cell.rows.begin(), cell.rows.end());
    normalize_rows(all_rows);

    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    std::size_t offset = 0;
    for (std::size_t i = 0; i < config.seeds.size(); ++i) {
        const std::string stem =
            config.output_dir + "/" + config.method + "-seed" + std::to_string(config.seeds[i]);
        std::ofstream csv(stem + ".csv");
        const std::vector<EvalRow> seed_rows(all_rows.begin() + static_cast<long>(offset),
                                             all_rows.begin() +
                                                 static_cast<long>(offset + cells[i].rows.size()));
        offset += cells[i].rows.size();
        write_eval_csv(csv, seed_rows, config.d);

        std::ofstream jsonl(stem + ".jsonl");
        write_iteration_log(jsonl, cells[i].log);

        std::ofstream snap(stem + "-snapshot.txt");
        if (cells[i].is_okb) {
            write_snapshot(snap, config, cells[i].okb_result);
        } else {
            BasisResult as_result;
            as_result.basis = cells[i].sfols_result.policies;
            as_result.partial_ccs = cells[i].sfols_result.ccs;
            as_result.truncated = cells[i].sfols_result.truncated;
            as_result.iterations = cells[i].sfols_result.iterations;
            as_result.basis_version = cells[i].sfols_result.iterations;
            write_snapshot(snap, config, as_result);
        }
    }
    return config.output_dir;
}

CompareReport compare_report(const std::vector<std::string>& csv_paths,
                             std::uint64_t bootstrap_seed, int bootstrap_samples) {
    std::vector<EvalRow> rows;
    for (const auto& path : csv_paths) {
        const auto file_rows = read_eval_csv(path);
        rows.insert(rows.end(), file_rows.begin(), file_rows.end());
    }
    if (rows.empty()) throw ConfigError("compare: no rows");

    // (method, iteration) -> seed -> norm returns
    std::map<std::pair<std::string, int>, std::map<std::uint64_t, std::vector<double>>> groups;
    for (const auto& row : rows)
        groups[{row.method, row.iteration}][row.seed].push_back(row.norm);

    CompareReport report;
    std::ostringstream csv, table;
    csv << "method,iteration,mean_norm_return,ci_lo,ci_hi,n_seeds\n";
    table << "method        iter   mean      ci_lo     ci_hi     seeds\n";
    for (const auto& [key, by_seed] : groups) {
        std::vector<double> seed_means;
        for (const auto& [seed, values] : by_seed) {
            (void)seed;
            double total = 0.0;
            for (double v : values) total += v;
            seed_means.push_back(total / static_cast<double>(values.size()));
        }
        double mean = 0.0;
        for (double v : seed_means) mean += v;
        mean /= static_cast<double>(seed_means.size());

        std::mt19937_64 rng(bootstrap_seed);
        std::vector<double> boot(static_cast<std::size_t>(bootstrap_samples));
        for (int b = 0; b < bootstrap_samples; ++b) {
            double total = 0.0;
            for (std::size_t i = 0; i < seed_means.size(); ++i)
                total += seed_means[static_cast<std::size_t>(rng() % seed_means.size())];
            boot[static_cast<std::size_t>(b)] = total / static_cast<double>(seed_means.size());
        }
        std::sort(boot.begin(), boot.end());
        const auto quantile = [&](double q) {
            const double pos = q * (bootstrap_samples - 1);
            return boot[static_cast<std::size_t>(std::llround(pos))];
        };

        CompareRow out;
        out.method = key.first;
        out.iteration = key.second;
        out.mean = mean;
        out.lo = quantile(0.025);
        out.hi = quantile(0.975);
        out.n_seeds = static_cast<int>(seed_means.size());
        report.rows.push_back(out);

        csv << out.method << ',' << out.iteration << ',' << fmt(out.mean) << ',' << fmt(out.lo)
            << ',' << fmt(out.hi) << ',' << out.n_seeds << '\n';
        char line[160];
        std::snprintf(line, sizeof(line), "%-13s %-6d %-9.6f %-9.6f %-9.6f %d\n", out.method.c_str(),
                      out.iteration, out.mean, out.lo, out.hi, out.n_seeds);
        table << line;
    }
    report.csv = csv.str();
    report.text_table = table.str();
    return report;
}

void write_snapshot(std::ostream& os, const ExperimentConfig& config, const BasisResult& result) {
    os << "okbasis-snapshot 1\n";
    os << "environment " << config.environment << '\n';
    for (const auto& [key, value] : config.env_params) os << "param " << key << ' ' << value << '\n';
    os << "method " << config.method << '\n';
    os << "d " << config.d << '\n';
    os << "chord_H " << config.chord_H << '\n';
    os << "chord_signed " << (config.chord_signed ? 1 : 0) << '\n';
    os << "tol " << fmt17(config.tol) << '\n';
    os << "iterations " << result.iterations << '\n';
    os << "truncated " << (result.truncated ? 1 : 0) << '\n';
    os << "basis_version " << result.basis_version << '\n';

    os << "basis " << result.basis.size() << '\n';
    for (const auto& rec : result.basis) {
        os << "source";
        if (rec.source_task) {
            for (Eigen::Index i = 0; i < rec.source_task->w.size(); ++i)
                os << ' ' << fmt17(rec.source_task->w[i]);
        } else {
            os << " none";
        }
        os << '\n';
        os << "policy";
        for (int a : rec.policy) os << ' ' << a;
        os << '\n';
        os << "sf";
        for (Eigen::Index i = 0; i < rec.sf_vector.size(); ++i) os << ' ' << fmt17(rec.sf_vector[i]);
        os << '\n';
    }

    os << "support " << result.weight_support.size() << '\n';
    for (const auto& t : result.weight_support) {
        os << "w";
        for (Eigen::Index i = 0; i < t.w.size(); ++i) os << ' ' << fmt17(t.w[i]);
        os << '\n';
    }

    os << "ccs " << result.partial_ccs.size() << '\n';
    for (std::size_t i = 0; i < result.partial_ccs.size(); ++i) {
        os << result.partial_ccs.ids[i];
        for (Eigen::Index j = 0; j < result.partial_ccs.vectors[i].size(); ++j)
            os << ' ' << fmt17(result.partial_ccs.vectors[i][j]);
        os << '\n';
    }
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("snapshot: cannot open " + path);
    std::string word;
    auto expect = [&](const std::string& token) {
        if (!(in >> word) || word != token)
            throw ConfigError("snapshot: malformed file, expected '" + token + "'");
    };

    expect("okbasis-snapshot");
    int version = 0;
    in >> version;
    if (version != 1) throw ConfigError("snapshot: unsupported version");

    Snapshot snap;
    expect("environment");
    in >> snap.config.environment;
    while (in >> word && word == "param") {
        std::string key, value;
        in >> key >> value;
        snap.config.env_params[key] = value;
    }
    if (word != "method") throw ConfigError("snapshot: malformed file, expected 'method'");
    in >> snap.config.method;
    expect("d");
    in >> snap.config.d;
    expect("chord_H");
    in >> snap.config.chord_H;
    expect("chord_signed");
    int flag = 0;
    in >> flag;
    snap.config.chord_signed = flag != 0;
    expect("tol");
    in >> snap.config.tol;
    expect("iterations");
    in >> snap.result.iterations;
    expect("truncated");
    in >> flag;
    snap.result.truncated = flag != 0;
    expect("basis_version");
    in >> snap.result.basis_version;

    snap.env = build_environment(snap.config.environment, snap.config.env_params, snap.config.d);
    const int n_states = snap.env.mcp.n_states;
    const int d = snap.config.d;

    expect("basis");
    std::size_t n_basis = 0;
    in >> n_basis;
    for (std::size_t r = 0; r < n_basis; ++r) {
        expect("source");
        in >> word;
        std::optional<TaskWeight> source;
        if (word != "none") {
            Eigen::VectorXd w(d);
            w[0] = std::stod(word);
            for (int i = 1; i < d; ++i) in >> w[i];
            source = TaskWeight{w, TaskKind::convex};
        }
        expect("policy");
        std::vector<int> policy(static_cast<std::size_t>(n_states));
        for (int s = 0; s < n_states; ++s) in >> policy[static_cast<std::size_t>(s)];
        expect("sf");
        Eigen::VectorXd stored(d);
        for (int i = 0; i < d; ++i) in >> stored[i];

        SFRecord rec = policy_successor_features(snap.env.mcp, snap.env.features, policy, source);
        if ((rec.sf_vector - stored).cwiseAbs().maxCoeff() > 1e-9)
            throw NumericError("snapshot: recomputed SF vector disagrees with the stored one");
        snap.result.basis.push_back(std::move(rec));
    }

    expect("support");
    std::size_t n_support = 0;
    in >> n_support;
    for (std::size_t i = 0; i < n_support; ++i) {
        expect("w");
        Eigen::VectorXd w(d);
        for (int j = 0; j < d; ++j) in >> w[j];
        snap.result.weight_support.push_back(TaskWeight{w, TaskKind::convex});
    }

    expect("ccs");
    std::size_t n_ccs = 0;
    in >> n_ccs;
    for (std::size_t i = 0; i < n_ccs; ++i) {
        int id = 0;
        in >> id;
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) in >> v[j];
        snap.result.partial_ccs.add(v, id);
    }
    if (!in) throw ConfigError("snapshot: truncated file");

    snap.result.meta.chords.chords = chord_grid(d, snap.config.chord_H, snap.config.chord_signed);
    for (const auto& t : snap.result.weight_support)
        register_linear_task(snap.env.mcp, snap.env.features, snap.result.basis, snap.result.meta,
                             t, snap.config.tol, snap.result.basis_version);
    return snap;
}

void write_chord_trajectory_csv(std::ostream& os, const std::vector<ChordStep>& steps, int d) {
    os << "step";
    for (int i = 0; i < d; ++i) os << ",z_" << i;
    os << ",policy_id,action\n";
    for (const auto& step : steps) {
        os << step.step;
        for (int i = 0; i < d; ++i) os << ',' << fmt(step.z[i]);
        os << ',' << step.record << ',' << step.action << '\n';
    }
}

CounterexampleDemo run_counterexample_demo(int sweep_points, int chord_H) {
    const BuiltEnv env = build_counterexample();
    std::vector<SFRecord> basis;
    for (int arm = 0; arm < 4; ++arm) {
        std::vector<int> policy(static_cast<std::size_t>(env.mcp.n_states), arm);
        basis.push_back(policy_successor_features(env.mcp, env.features, policy, std::nullopt));
    }

    CounterexampleDemo demo;
    const double pi = std::acos(-1.0);
    for (int k = 0; k < sweep_points; ++k) {
        const double theta = 2.0 * pi * k / sweep_points;
        Eigen::VectorXd z(2);
        z << std::cos(theta), std::sin(theta);
        if (gpi_action(basis, 0, z) == 3) ++demo.a4_selected;
        ++demo.swept_chords;
    }
    for (const auto& z : chord_grid(2, 64, true)) {
        if (gpi_action(basis, 0, z) == 3) ++demo.a4_selected;
        ++demo.swept_chords;
    }
    demo.pass_sweep = demo.swept_chords >= 10000 && demo.a4_selected == 0;

    const NonlinearReward task = counterexample_state_reward(env.mcp);
    demo.optimal_value = solve_task(env.mcp, task.table).v_mu;
    ChordSet chords;
    chords.chords = chord_grid(2, chord_H, true);
    MetaPolicy meta = train_meta_policy(env.mcp, basis, task, chords);
    demo.keyboard_value = meta.tasks[0].value;
    demo.pass_gap = demo.optimal_value - demo.keyboard_value >= 0.5;

    const AdvantageReport rep = advantage_report(env.mcp, task.table, basis, meta, 0);
    demo.witness_advantage = rep.advantage(0, 3);
    for (const auto& [s, a] : rep.witnesses)
        if (s == 0 && a == 3) demo.witness_flagged = true;
    demo.pass_witness = demo.witness_flagged && demo.witness_advantage > 0.0;
    return demo;
}

} // namespace okb
