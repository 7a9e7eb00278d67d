#include "okb/basis.hpp"

#include "okb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace okb {

namespace {

bool contains_weight(const std::vector<TaskWeight>& support, const Eigen::VectorXd& w) {
    for (const auto& t : support)
        if (t.w.size() == w.size() && (t.w - w).cwiseAbs().maxCoeff() < 1e-9) return true;
    return false;
}

std::vector<Eigen::VectorXd> bootstrap_corners(int d) {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < d; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(d);
        e[i] = 1.0;
        out.push_back(std::move(e));
    }
    out.push_back(Eigen::VectorXd::Constant(d, 1.0 / d));
    return out;
}

// Cache of exact optima keyed by quantized weights.
class OptimumCache {
public:
    OptimumCache(const TabularMCP& mcp, const FeatureMap& features, int& counter)
        : mcp_(mcp), features_(features), counter_(counter) {}

    double value(const Eigen::VectorXd& w) {
        std::vector<long long> key(static_cast<std::size_t>(w.size()));
        for (Eigen::Index i = 0; i < w.size(); ++i)
            key[static_cast<std::size_t>(i)] = std::llround(w[i] * 1e12);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        TaskWeight task{w, TaskKind::convex};
        const double v = solve_task(mcp_, task_reward(features_, task)).v_mu;
        ++counter_;
        cache_.emplace(std::move(key), v);
        return v;
    }

private:
    const TabularMCP& mcp_;
    const FeatureMap& features_;
    int& counter_;
    std::map<std::vector<long long>, double> cache_;
};

} // namespace

void ok_ls(const TabularMCP& mcp, const FeatureMap& features,
           const std::vector<SFRecord>& basis, int basis_version, MetaPolicy& meta,
           SFSet& psi_ok, std::vector<TaskWeight>& support, const OkbConfig& config,
           int& next_ccs_id, int& meta_trainings) {
    if (basis.empty()) throw std::invalid_argument("ok_ls: empty basis");

    // Refresh support entries trained against an older basis; union their
    // fresh SF vectors so scalarized coverage never drops.
    bool refreshed = false;
    for (const auto& w : support) {
        const int existing = meta.find_linear_task(w.w);
        if (existing >= 0 &&
            meta.tasks[static_cast<std::size_t>(existing)].basis_version == basis_version)
            continue;
        const int tid =
            register_linear_task(mcp, features, basis, meta, w, config.tol, basis_version);
        ++meta_trainings;
        const SFRecord rec = ok_policy_successor_features(mcp, features, basis, meta, tid);
        if (psi_ok.add_dedup(rec.sf_vector, next_ccs_id)) ++next_ccs_id;
        refreshed = true;
    }
    if (refreshed) psi_ok = remove_dominated(psi_ok, config.tol);

    for (int pass = 0; pass < config.okls_iters; ++pass) {
        std::vector<Eigen::VectorXd> corners;
        if (psi_ok.empty()) {
            corners = bootstrap_corners(features.dim);
        } else {
            for (const auto& cw : corner_weights(psi_ok)) corners.push_back(cw.w);
        }
        std::vector<Eigen::VectorXd> fresh;
        for (const auto& w : corners)
            if (!contains_weight(support, w)) fresh.push_back(w);
        if (fresh.empty()) return;

        for (const auto& w : fresh) {
            TaskWeight task{w, TaskKind::convex};
            support.push_back(task);
            const int tid =
                register_linear_task(mcp, features, basis, meta, task, config.tol, basis_version);
            ++meta_trainings;
            const SFRecord rec = ok_policy_successor_features(mcp, features, basis, meta, tid);
            if (psi_ok.add_dedup(rec.sf_vector, next_ccs_id)) ++next_ccs_id;
        }
        psi_ok = remove_dominated(psi_ok, config.tol);
    }
}

TaskWeight select_candidate(const std::vector<TaskWeight>& candidates,
                            OkbConfig::Selection mode,
                            const std::vector<double>& mean_positive, int d,
                            std::mt19937_64& rng) {
    if (mode == OkbConfig::Selection::uniform) {
        Eigen::VectorXd w(d);
        double total = 0.0;
        for (int i = 0; i < d; ++i) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            w[i] = -std::log(std::max(1e-300, 1.0 - u));
            total += w[i];
        }
        w /= total;
        return TaskWeight{w, TaskKind::convex};
    }
    if (candidates.empty())
        throw std::invalid_argument("select_candidate: empty candidate set in advantage mode");
    if (mean_positive.size() != candidates.size())
        throw std::invalid_argument("select_candidate: advantage list size mismatch");
    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (mean_positive[i] > mean_positive[best]) best = i;
    return candidates[best];
}

BasisResult okb_run(const TabularMCP& mcp, const FeatureMap& features, const OkbConfig& config,
                    const IterationObserver& observer) {
    if (config.chords.chords.empty()) throw std::invalid_argument("okb_run: empty chord set");
    if (config.max_iters < 1) throw std::invalid_argument("okb_run: max_iters must be >= 1");
    config.chords.validate();
    const int d = features.dim;

    BasisResult result;
    result.meta.chords = config.chords;
    std::mt19937_64 rng(config.seed);

    int policy_solves = 0, meta_trainings = 0, oracle_solves = 0;
    int next_ccs_id = 0;

    auto new_policy = [&](const TaskWeight& w) {
        const PlanResult plan = solve_task(mcp, task_reward(features, w));
        ++policy_solves;
        return policy_successor_features(mcp, features, plan.policy, w);
    };

    const TaskWeight initial = uniform_task(d);
    result.basis.push_back(new_policy(initial));
    result.basis_version = 1;
    result.iterations = 1;

    SFSet psi_base;
    psi_base.add(result.basis[0].sf_vector, 0);

    OptimumCache optimum(mcp, features, oracle_solves);

    for (int k = 0;; ++k) {
        ok_ls(mcp, features, result.basis, result.basis_version, result.meta, result.partial_ccs,
              result.weight_support, config, next_ccs_id, meta_trainings);
        if (observer)
            observer(IterationView{result.iterations, result.basis, &result.meta,
                                   result.basis_version});

        // Candidate tasks: corner weights of both SF sets that the keyboard
        // cannot solve optimally, detected through a positive exact advantage.
        std::vector<Eigen::VectorXd> corners;
        for (const auto& cw : corner_weights(psi_base)) corners.push_back(cw.w);
        if (!result.partial_ccs.empty())
            for (const auto& cw : corner_weights(result.partial_ccs)) {
                bool dup = false;
                for (const auto& seen : corners)
                    if ((seen - cw.w).cwiseAbs().maxCoeff() < 1e-9) {
                        dup = true;
                        break;
                    }
                if (!dup) corners.push_back(cw.w);
            }

        IterationLog log;
        log.iter = k;
        log.corners = corners;
        std::vector<TaskWeight> candidates;
        std::vector<double> advantages;
        for (const auto& w : corners) {
            TaskWeight task{w, TaskKind::convex};
            const int tid = register_linear_task(mcp, features, result.basis, result.meta, task,
                                                 config.tol, result.basis_version);
            ++meta_trainings;
            const AdvantageReport rep =
                advantage_report(mcp, task_reward(features, task), result.basis, result.meta, tid,
                                 config.tol);
            const double delta =
                optimum.value(w) - result.meta.tasks[static_cast<std::size_t>(tid)].value;
            log.corner_deltas.push_back(delta);
            log.max_delta = std::max(log.max_delta, delta);
            if (rep.max_positive > config.tol) {
                candidates.push_back(task);
                advantages.push_back(rep.mean_positive);
            }
        }

        log.n_basis = static_cast<int>(result.basis.size());
        log.n_support = static_cast<int>(result.weight_support.size());
        for (const auto& c : candidates) log.candidates.push_back(c.w);
        log.policy_solves = policy_solves;
        log.meta_trainings = meta_trainings;
        log.oracle_solves = oracle_solves;

        if (candidates.empty()) {
            result.log.push_back(std::move(log));
            break;
        }
        if (result.iterations >= config.max_iters) {
            result.truncated = true;
            result.log.push_back(std::move(log));
            break;
        }

        const TaskWeight chosen =
            select_candidate(candidates, config.selection, advantages, d, rng);
        log.selected_w = chosen.w;
        result.log.push_back(std::move(log));

        result.basis.push_back(new_policy(chosen));
        ++result.iterations;
        psi_base.add(result.basis.back().sf_vector, static_cast<int>(psi_base.size()));

        const SFSet pruned = remove_dominated(psi_base, config.tol);
        std::vector<SFRecord> kept;
        SFSet renumbered;
        for (std::size_t i = 0; i < pruned.size(); ++i) {
            kept.push_back(result.basis[static_cast<std::size_t>(pruned.ids[i])]);
            renumbered.add(pruned.vectors[i], static_cast<int>(i));
        }
        result.basis = std::move(kept);
        psi_base = std::move(renumbered);
        ++result.basis_version;
    }
    return result;
}

SfolsResult sfols_run(const TabularMCP& mcp, const FeatureMap& features, const OkbConfig& config,
                      const IterationObserver& observer) {
    if (config.max_iters < 1) throw std::invalid_argument("sfols_run: max_iters must be >= 1");
    const int d = features.dim;

    SfolsResult result;
    int policy_solves = 0, oracle_solves = 0;
    OptimumCache optimum(mcp, features, oracle_solves);

    auto new_policy = [&](const TaskWeight& w) {
        const PlanResult plan = solve_task(mcp, task_reward(features, w));
        ++policy_solves;
        return policy_successor_features(mcp, features, plan.policy, w);
    };

    result.policies.push_back(new_policy(uniform_task(d)));
    result.ccs.add(result.policies[0].sf_vector, 0);
    result.iterations = 1;
    if (observer) observer(IterationView{1, result.policies, nullptr, 1});

    for (int k = 0;; ++k) {
        const auto corners = corner_weights(result.ccs);
        IterationLog log;
        log.iter = k;
        int best = -1;
        for (int i = 0; i < static_cast<int>(corners.size()); ++i) {
            log.corners.push_back(corners[static_cast<std::size_t>(i)].w);
            const double delta = optimum.value(corners[static_cast<std::size_t>(i)].w) -
                                 corners[static_cast<std::size_t>(i)].value;
            log.corner_deltas.push_back(delta);
            if (delta > log.max_delta) {
                log.max_delta = delta;
                best = i;
            }
        }
        log.n_basis = static_cast<int>(result.policies.size());
        log.policy_solves = policy_solves;
        log.oracle_solves = oracle_solves;

        if (best < 0 || log.max_delta <= config.tol) {
            result.log.push_back(std::move(log));
            break;
        }
        if (result.iterations >= config.max_iters) {
            result.truncated = true;
            result.log.push_back(std::move(log));
            break;
        }

        TaskWeight task{corners[static_cast<std::size_t>(best)].w, TaskKind::convex};
        log.selected_w = task.w;
        result.log.push_back(std::move(log));

        result.policies.push_back(new_policy(task));
        ++result.iterations;
        result.ccs.add(result.policies.back().sf_vector,
                       static_cast<int>(result.ccs.size()));

        const SFSet pruned = remove_dominated(result.ccs, config.tol);
        std::vector<SFRecord> kept;
        SFSet renumbered;
        for (std::size_t i = 0; i < pruned.size(); ++i) {
            kept.push_back(result.policies[static_cast<std::size_t>(pruned.ids[i])]);
            renumbered.add(pruned.vectors[i], static_cast<int>(i));
        }
        result.policies = std::move(kept);
        result.ccs = std::move(renumbered);
        if (observer)
            observer(IterationView{result.iterations, result.policies, nullptr, result.iterations});
    }
    return result;
}

} // namespace okb
