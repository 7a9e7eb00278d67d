#include "okb/harness.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace okb;

namespace {

TaskWeight make_task(const Eigen::VectorXd& w, const std::string& kind) {
    TaskWeight t;
    t.w = w;
    if (kind == "convex") t.kind = TaskKind::convex;
    else if (kind == "linear") t.kind = TaskKind::linear;
    else throw std::invalid_argument("task kind must be 'convex' or 'linear'");
    t.validate();
    return t;
}

SFSet make_set(const std::vector<Eigen::VectorXd>& vectors) {
    SFSet set;
    for (std::size_t i = 0; i < vectors.size(); ++i) set.add(vectors[i], static_cast<int>(i));
    return set;
}

ChordSet make_chords(const std::vector<Eigen::VectorXd>& chords) {
    ChordSet z;
    z.chords = chords;
    z.validate();
    return z;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Tabular successor features, GPI and option-keyboard basis construction";

    py::class_<TabularMCP>(m, "TabularMCP")
        .def_readonly("n_states", &TabularMCP::n_states)
        .def_readonly("n_actions", &TabularMCP::n_actions)
        .def_readonly("discount", &TabularMCP::discount)
        .def_readonly("initial_dist", &TabularMCP::initial_dist)
        .def("is_terminal", &TabularMCP::is_terminal)
        .def("validate", &TabularMCP::validate)
        .def("probability", [](const TabularMCP& mcp, int s, int a, int next) {
            double p = 0.0;
            for (const auto& o : mcp.outcomes(s, a))
                if (o.next == next) p += o.prob;
            return p;
        });

    py::class_<FeatureMap>(m, "FeatureMap")
        .def_readonly("dim", &FeatureMap::dim)
        .def("expected", &FeatureMap::expected)
        .def("validate", &FeatureMap::validate);

    py::class_<RewardTable>(m, "RewardTable")
        .def("expected", &RewardTable::expected);

    py::class_<NonlinearReward>(m, "NonlinearReward")
        .def_property_readonly("table", [](const NonlinearReward& r) { return r.table; });

    m.def("task_reward",
          [](const FeatureMap& f, const Eigen::VectorXd& w, const std::string& kind) {
              return task_reward(f, make_task(w, kind));
          },
          py::arg("features"), py::arg("w"), py::arg("kind") = "convex");

    m.def("build_counterexample",
          [](double gamma) {
              BuiltEnv env = build_counterexample(gamma);
              return py::make_tuple(env.mcp, env.features);
          },
          py::arg("gamma") = 0.9);
    m.def("counterexample_state_reward", &counterexample_state_reward);
    m.def("build_item_grid",
          [](int width, int height, int items_per_type, bool toroidal, std::uint64_t seed,
             double gamma) {
              BuiltEnv env = build_item_grid(width, height, items_per_type, toroidal, seed, gamma);
              return py::make_tuple(env.mcp, env.features);
          },
          py::arg("width"), py::arg("height"), py::arg("items_per_type"), py::arg("toroidal"),
          py::arg("seed"), py::arg("gamma") = 0.95);
    m.def("item_grid_sequential_reward", &item_grid_sequential_reward, py::arg("width"),
          py::arg("height"), py::arg("items_per_type"), py::arg("toroidal"), py::arg("seed"),
          py::arg("gamma") = 0.95);
    m.def("build_random_mcp",
          [](std::uint64_t seed, int n_states, int n_actions, int d, double gamma, int branching) {
              BuiltEnv env = build_random_mcp(seed, n_states, n_actions, d, gamma, branching);
              return py::make_tuple(env.mcp, env.features);
          },
          py::arg("seed"), py::arg("n_states"), py::arg("n_actions"), py::arg("d"),
          py::arg("gamma"), py::arg("branching"));
    m.def("build_two_corridor",
          [](int length, double gamma) {
              BuiltEnv env = build_two_corridor(length, gamma);
              return py::make_tuple(env.mcp, env.features);
          },
          py::arg("length") = 2, py::arg("gamma") = 0.95);

    py::class_<PlanResult>(m, "PlanResult")
        .def_readonly("q", &PlanResult::q)
        .def_readonly("policy", &PlanResult::policy)
        .def_readonly("v_mu", &PlanResult::v_mu);

    py::class_<SFRecord>(m, "SFRecord")
        .def_readonly("policy", &SFRecord::policy)
        .def_readonly("sf_table", &SFRecord::sf_table)
        .def_readonly("sf_vector", &SFRecord::sf_vector)
        .def_property_readonly("source_w", [](const SFRecord& r) -> py::object {
            if (!r.source_task) return py::none();
            return py::cast(r.source_task->w);
        });

    py::class_<FlatEvaluation>(m, "FlatEvaluation")
        .def_readonly("q", &FlatEvaluation::q)
        .def_readonly("v", &FlatEvaluation::v)
        .def_readonly("v_mu", &FlatEvaluation::v_mu);

    m.def("solve_task", &solve_task, py::arg("mcp"), py::arg("reward"), py::arg("tol") = 1e-10);
    m.def("evaluate_flat_policy", &evaluate_flat_policy);
    m.def("policy_successor_features",
          [](const TabularMCP& mcp, const FeatureMap& f, const std::vector<int>& policy,
             py::object source_w) {
              std::optional<TaskWeight> source;
              if (!source_w.is_none())
                  source = make_task(source_w.cast<Eigen::VectorXd>(), "convex");
              return policy_successor_features(mcp, f, policy, source);
          },
          py::arg("mcp"), py::arg("features"), py::arg("policy"), py::arg("source_w") = py::none());
    m.def("gpi_action", &gpi_action);
    m.def("gpi_flat_policy", &gpi_flat_policy);
    m.def("gpi_gap_bound",
          [](const TabularMCP& mcp, const FeatureMap& f, const std::vector<SFRecord>& basis,
             const Eigen::VectorXd& w, double eps) {
              const GapBound g = gpi_gap_bound(mcp, f, basis, make_task(w, "convex"), eps);
              return py::make_tuple(g.lhs, g.rhs);
          },
          py::arg("mcp"), py::arg("features"), py::arg("basis"), py::arg("w"), py::arg("eps") = 0.0);

    m.def("corner_weights", [](const std::vector<Eigen::VectorXd>& vectors) {
        std::vector<std::pair<Eigen::VectorXd, double>> out;
        for (const auto& cw : corner_weights(make_set(vectors))) out.emplace_back(cw.w, cw.value);
        return out;
    });
    m.def("remove_dominated",
          [](const std::vector<Eigen::VectorXd>& vectors, double tol) {
              const SFSet kept = remove_dominated(make_set(vectors), tol);
              return py::make_tuple(kept.vectors, kept.ids);
          },
          py::arg("vectors"), py::arg("tol") = 1e-9);
    m.def("scalarized_max",
          [](const std::vector<Eigen::VectorXd>& vectors, const Eigen::VectorXd& w) {
              const ScalarizedMax best = scalarized_max(make_set(vectors), w);
              return py::make_tuple(best.value, best.id);
          });
    m.def("linear_to_convex",
          [](const FeatureMap& f, const Eigen::VectorXd& w) {
              const ConvexTransform t = linear_to_convex(f, make_task(w, "linear"));
              return py::make_tuple(t.features, t.weight.w, t.scale);
          });
    m.def("simplex_grid", &simplex_grid);
    m.def("chord_grid", &chord_grid, py::arg("d"), py::arg("H"), py::arg("with_signs"));

    py::class_<MetaPolicy>(m, "MetaPolicy")
        .def("chord", &MetaPolicy::chord, py::return_value_policy::copy)
        .def("task_value",
             [](const MetaPolicy& meta, int task_id) {
                 meta.check_task(task_id);
                 return meta.tasks[static_cast<std::size_t>(task_id)].value;
             })
        .def_property_readonly("n_tasks",
                               [](const MetaPolicy& meta) { return meta.tasks.size(); });

    m.def("train_meta_policy",
          [](const TabularMCP& mcp, const FeatureMap& f, const std::vector<SFRecord>& basis,
             const std::vector<Eigen::VectorXd>& tasks, const std::vector<Eigen::VectorXd>& chords,
             double tol) {
              std::vector<TaskWeight> ts;
              for (const auto& w : tasks) ts.push_back(make_task(w, "convex"));
              return train_meta_policy(mcp, f, basis, ts, make_chords(chords), tol);
          },
          py::arg("mcp"), py::arg("features"), py::arg("basis"), py::arg("tasks"),
          py::arg("chords"), py::arg("tol") = 1e-9);
    m.def("train_meta_policy_nonlinear",
          [](const TabularMCP& mcp, const std::vector<SFRecord>& basis, const NonlinearReward& r,
             const std::vector<Eigen::VectorXd>& chords, double tol) {
              return train_meta_policy(mcp, basis, r, make_chords(chords), tol);
          },
          py::arg("mcp"), py::arg("basis"), py::arg("reward"), py::arg("chords"),
          py::arg("tol") = 1e-9);
    m.def("ok_action", &ok_action);
    m.def("ok_flat_policy", &ok_flat_policy);
    m.def("ok_policy_successor_features", &ok_policy_successor_features);

    py::class_<AdvantageReport>(m, "AdvantageReport")
        .def_readonly("advantage", &AdvantageReport::advantage)
        .def_readonly("max_positive", &AdvantageReport::max_positive)
        .def_readonly("mean_positive", &AdvantageReport::mean_positive)
        .def_readonly("witnesses", &AdvantageReport::witnesses);
    m.def("advantage_report", &advantage_report, py::arg("mcp"), py::arg("reward"),
          py::arg("basis"), py::arg("meta"), py::arg("task_id"), py::arg("tol") = 1e-9);

    py::class_<BasisResult>(m, "BasisResult")
        .def_readonly("basis", &BasisResult::basis)
        .def_readonly("iterations", &BasisResult::iterations)
        .def_readonly("truncated", &BasisResult::truncated)
        .def_property_readonly("partial_ccs",
                               [](const BasisResult& r) { return r.partial_ccs.vectors; })
        .def_property_readonly("weight_support", [](const BasisResult& r) {
            std::vector<Eigen::VectorXd> out;
            for (const auto& t : r.weight_support) out.push_back(t.w);
            return out;
        });

    py::class_<SfolsResult>(m, "SfolsResult")
        .def_readonly("policies", &SfolsResult::policies)
        .def_readonly("iterations", &SfolsResult::iterations)
        .def_readonly("truncated", &SfolsResult::truncated)
        .def_property_readonly("ccs", [](const SfolsResult& r) { return r.ccs.vectors; });

    m.def("okb_run",
          [](const TabularMCP& mcp, const FeatureMap& f, const std::vector<Eigen::VectorXd>& chords,
             double tol, int max_iters, int okls_iters, const std::string& selection,
             std::uint64_t seed) {
              OkbConfig cfg;
              cfg.chords = make_chords(chords);
              cfg.tol = tol;
              cfg.max_iters = max_iters;
              cfg.okls_iters = okls_iters;
              if (selection == "advantage") cfg.selection = OkbConfig::Selection::advantage;
              else if (selection == "uniform") cfg.selection = OkbConfig::Selection::uniform;
              else throw std::invalid_argument("selection must be 'advantage' or 'uniform'");
              cfg.seed = seed;
              return okb_run(mcp, f, cfg);
          },
          py::arg("mcp"), py::arg("features"), py::arg("chords"), py::arg("tol") = 1e-9,
          py::arg("max_iters") = 20, py::arg("okls_iters") = 5, py::arg("selection") = "advantage",
          py::arg("seed") = 0);
    m.def("sfols_run",
          [](const TabularMCP& mcp, const FeatureMap& f, double tol, int max_iters) {
              OkbConfig cfg;
              cfg.chords.chords = chord_grid(f.dim, 1, false);
              cfg.tol = tol;
              cfg.max_iters = max_iters;
              return sfols_run(mcp, f, cfg);
          },
          py::arg("mcp"), py::arg("features"), py::arg("tol") = 1e-9, py::arg("max_iters") = 20);

    py::class_<EvalRow>(m, "EvalRow")
        .def_readonly("method", &EvalRow::method)
        .def_readonly("seed", &EvalRow::seed)
        .def_readonly("iteration", &EvalRow::iteration)
        .def_readonly("w", &EvalRow::w)
        .def_readonly("raw", &EvalRow::raw)
        .def_readonly("norm", &EvalRow::norm)
        .def_readonly("opt", &EvalRow::opt);
    m.def("evaluate_zero_shot",
          [](BasisResult& result, const std::vector<Eigen::VectorXd>& weights,
             const TabularMCP& mcp, const FeatureMap& f, const std::string& mode) {
              return evaluate_zero_shot(result, weights, mcp, f,
                                        mode == "gpi" ? EvalMode::gpi : EvalMode::ok);
          },
          py::arg("result"), py::arg("weights"), py::arg("mcp"), py::arg("features"),
          py::arg("mode") = "ok");

    m.def("run_experiment_text", [](const std::string& config_text) {
        return run_experiment(parse_config_text(config_text));
    });

    py::class_<CounterexampleDemo>(m, "CounterexampleDemo")
        .def_readonly("swept_chords", &CounterexampleDemo::swept_chords)
        .def_readonly("a4_selected", &CounterexampleDemo::a4_selected)
        .def_readonly("optimal_value", &CounterexampleDemo::optimal_value)
        .def_readonly("keyboard_value", &CounterexampleDemo::keyboard_value)
        .def_readonly("witness_advantage", &CounterexampleDemo::witness_advantage)
        .def_readonly("witness_flagged", &CounterexampleDemo::witness_flagged)
        .def("all_pass", &CounterexampleDemo::all_pass);
    m.def("run_counterexample_demo", &run_counterexample_demo, py::arg("sweep_points") = 20000,
          py::arg("chord_H") = 16);
}
