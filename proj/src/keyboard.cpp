#include "okb/keyboard.hpp"

#include "okb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace okb {

namespace {

constexpr double kSwitchMargin = 1e-13;
constexpr int kMaxTrainIterations = 10000;

std::vector<int> flat_from_choice(const TabularMCP& mcp, const std::vector<std::vector<int>>& act,
                                  const std::vector<int>& choice) {
    std::vector<int> flat(static_cast<std::size_t>(mcp.n_states), 0);
    for (int s = 0; s < mcp.n_states; ++s)
        if (!mcp.is_terminal(s))
            flat[static_cast<std::size_t>(s)] =
                act[static_cast<std::size_t>(s)][static_cast<std::size_t>(choice[static_cast<std::size_t>(s)])];
    return flat;
}

// Exact solve of the chord-action MDP: the chord table whose induced flat
// policy is optimal among all per-state chord assignments.
struct TrainedTable {
    std::vector<int> choice;
    double value;
};

TrainedTable train_chord_table(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                               const RewardTable& reward,
                               const std::vector<Eigen::VectorXd>& all_chords, int init_chord) {
    if (basis.empty()) throw std::invalid_argument("train_meta_policy: empty basis");
    if (all_chords.empty()) throw std::invalid_argument("train_meta_policy: empty chord set");

    const int n_chords = static_cast<int>(all_chords.size());
    std::vector<std::vector<int>> act(static_cast<std::size_t>(mcp.n_states));
    for (int s = 0; s < mcp.n_states; ++s) {
        if (mcp.is_terminal(s)) continue;
        auto& row = act[static_cast<std::size_t>(s)];
        row.resize(static_cast<std::size_t>(n_chords));
        for (int j = 0; j < n_chords; ++j)
            row[static_cast<std::size_t>(j)] = gpi_action(basis, s, all_chords[static_cast<std::size_t>(j)]);
    }

    std::vector<int> choice(static_cast<std::size_t>(mcp.n_states), init_chord);
    FlatEvaluation eval;
    for (int iter = 0;; ++iter) {
        if (iter >= kMaxTrainIterations)
            throw NumericError("train_meta_policy: chord policy iteration failed to converge");
        eval = evaluate_flat_policy(mcp, reward, flat_from_choice(mcp, act, choice));
        bool changed = false;
        for (int s = 0; s < mcp.n_states; ++s) {
            if (mcp.is_terminal(s)) continue;
            const auto& row = act[static_cast<std::size_t>(s)];
            int cur = choice[static_cast<std::size_t>(s)];
            double best_q = eval.q(s, row[static_cast<std::size_t>(cur)]);
            int best = cur;
            for (int j = 0; j < n_chords; ++j)
                if (eval.q(s, row[static_cast<std::size_t>(j)]) > best_q + kSwitchMargin) {
                    best = j;
                    best_q = eval.q(s, row[static_cast<std::size_t>(j)]);
                }
            if (best != cur) {
                choice[static_cast<std::size_t>(s)] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }

    // Canonical greedy table over the converged values, lowest index first.
    TrainedTable out;
    out.choice.assign(static_cast<std::size_t>(mcp.n_states), 0);
    for (int s = 0; s < mcp.n_states; ++s) {
        if (mcp.is_terminal(s)) continue;
        const auto& row = act[static_cast<std::size_t>(s)];
        int best = 0;
        for (int j = 1; j < n_chords; ++j)
            if (eval.q(s, row[static_cast<std::size_t>(j)]) > eval.q(s, row[static_cast<std::size_t>(best)]))
                best = j;
        out.choice[static_cast<std::size_t>(s)] = best;
    }
    out.value =
        evaluate_flat_policy(mcp, reward, flat_from_choice(mcp, act, out.choice)).v_mu;
    return out;
}

std::vector<Eigen::VectorXd> chords_with_task(const ChordSet& grid, const Eigen::VectorXd& task_chord) {
    std::vector<Eigen::VectorXd> all = grid.chords;
    all.push_back(task_chord);
    return all;
}

} // namespace

void ChordSet::validate() const {
    for (const auto& z : chords) {
        if (std::abs(z.norm() - 1.0) > 1e-12)
            throw std::invalid_argument("ChordSet: chord is not unit length");
        if (z.size() != chords.front().size())
            throw std::invalid_argument("ChordSet: mixed chord dimensions");
    }
    for (std::size_t i = 0; i < chords.size(); ++i)
        for (std::size_t j = i + 1; j < chords.size(); ++j)
            if ((chords[i] - chords[j]).cwiseAbs().maxCoeff() < 1e-12)
                throw std::invalid_argument("ChordSet: duplicate chords");
}

int MetaPolicy::find_linear_task(const Eigen::VectorXd& w, double tol) const {
    for (std::size_t i = 0; i < tasks.size(); ++i)
        if (tasks[i].weight && tasks[i].weight->w.size() == w.size() &&
            (tasks[i].weight->w - w).cwiseAbs().maxCoeff() < tol)
            return static_cast<int>(i);
    return -1;
}

void MetaPolicy::check_task(int task_id) const {
    if (task_id < 0 || task_id >= static_cast<int>(tasks.size()))
        throw std::invalid_argument("MetaPolicy: task not registered");
}

const Eigen::VectorXd& MetaPolicy::chord(int s, int task_id) const {
    check_task(task_id);
    const MetaTask& t = tasks[static_cast<std::size_t>(task_id)];
    const int j = t.chord_choice[static_cast<std::size_t>(s)];
    if (j == static_cast<int>(chords.chords.size())) return t.task_chord;
    return chords.chords[static_cast<std::size_t>(j)];
}

bool MetaPolicy::has_nonlinear() const {
    for (const auto& t : tasks)
        if (t.reward) return true;
    return false;
}

int register_linear_task(const TabularMCP& mcp, const FeatureMap& features,
                         const std::vector<SFRecord>& basis, MetaPolicy& meta,
                         const TaskWeight& task, double tol, int basis_version) {
    (void)tol;
    task.validate();
    if (features.dim != task.w.size()) {
        std::ostringstream os;
        os << "register_linear_task: feature dim " << features.dim << " != weight dim " << task.w.size();
        throw std::invalid_argument(os.str());
    }
    if (meta.has_nonlinear())
        throw std::invalid_argument("MetaPolicy: registry holds a non-linear task already");

    int id = meta.find_linear_task(task.w);
    if (id >= 0 && meta.tasks[static_cast<std::size_t>(id)].basis_version == basis_version)
        return id;

    MetaTask entry;
    entry.weight = task;
    entry.task_chord = task.w / task.w.norm();
    entry.basis_version = basis_version;
    const TrainedTable trained =
        train_chord_table(mcp, basis, task_reward(features, task),
                          chords_with_task(meta.chords, entry.task_chord),
                          static_cast<int>(meta.chords.chords.size()));
    entry.chord_choice = trained.choice;
    entry.value = trained.value;

    if (id >= 0) {
        meta.tasks[static_cast<std::size_t>(id)] = std::move(entry);
        return id;
    }
    meta.tasks.push_back(std::move(entry));
    return static_cast<int>(meta.tasks.size()) - 1;
}

int register_nonlinear_task(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                            MetaPolicy& meta, const NonlinearReward& reward, double tol,
                            int basis_version) {
    (void)tol;
    if (!meta.tasks.empty())
        throw std::invalid_argument("MetaPolicy: a non-linear task must be the only registered task");
    reward.table.validate(mcp);

    MetaTask entry;
    entry.reward = reward;
    entry.basis_version = basis_version;
    const TrainedTable trained =
        train_chord_table(mcp, basis, reward.table, meta.chords.chords, 0);
    entry.chord_choice = trained.choice;
    entry.value = trained.value;
    meta.tasks.push_back(std::move(entry));
    return 0;
}

MetaPolicy train_meta_policy(const TabularMCP& mcp, const FeatureMap& features,
                             const std::vector<SFRecord>& basis,
                             const std::vector<TaskWeight>& tasks, ChordSet chords,
                             double tol) {
    chords.validate();
    MetaPolicy meta;
    meta.chords = std::move(chords);
    for (const auto& t : tasks) register_linear_task(mcp, features, basis, meta, t, tol);
    return meta;
}

MetaPolicy train_meta_policy(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                             const NonlinearReward& reward, ChordSet chords, double tol) {
    chords.validate();
    MetaPolicy meta;
    meta.chords = std::move(chords);
    register_nonlinear_task(mcp, basis, meta, reward, tol);
    return meta;
}

int ok_action(const std::vector<SFRecord>& basis, const MetaPolicy& meta, int s, int task_id) {
    return gpi_action(basis, s, meta.chord(s, task_id));
}

std::vector<int> ok_flat_policy(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                                const MetaPolicy& meta, int task_id) {
    meta.check_task(task_id);
    std::vector<int> flat(static_cast<std::size_t>(mcp.n_states), 0);
    for (int s = 0; s < mcp.n_states; ++s)
        if (!mcp.is_terminal(s)) flat[static_cast<std::size_t>(s)] = ok_action(basis, meta, s, task_id);
    return flat;
}

SFRecord ok_policy_successor_features(const TabularMCP& mcp, const FeatureMap& features,
                                      const std::vector<SFRecord>& basis, const MetaPolicy& meta,
                                      int task_id) {
    meta.check_task(task_id);
    const MetaTask& t = meta.tasks[static_cast<std::size_t>(task_id)];
    return policy_successor_features(mcp, features, ok_flat_policy(mcp, basis, meta, task_id),
                                     t.weight);
}

AdvantageReport advantage_report(const TabularMCP& mcp, const RewardTable& reward,
                                 const std::vector<SFRecord>& basis, const MetaPolicy& meta,
                                 int task_id, double tol) {
    meta.check_task(task_id);
    const FlatEvaluation eval =
        evaluate_flat_policy(mcp, reward, ok_flat_policy(mcp, basis, meta, task_id));

    AdvantageReport rep;
    rep.advantage = eval.q.colwise() - eval.v;
    rep.max_positive = rep.advantage.maxCoeff();
    double pos_sum = 0.0;
    int pos_count = 0;
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a) {
            const double adv = rep.advantage(s, a);
            if (adv > 0.0) {
                pos_sum += adv;
                ++pos_count;
            }
            if (adv > tol) rep.witnesses.emplace_back(s, a);
        }
    rep.mean_positive = pos_count == 0 ? 0.0 : pos_sum / pos_count;
    return rep;
}

std::vector<ChordStep> chord_trajectory(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                                        const MetaPolicy& meta, int task_id, int max_steps,
                                        std::uint64_t seed) {
    meta.check_task(task_id);
    std::mt19937_64 rng(seed);
    auto draw = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    int s = 0;
    double u = draw(), acc = 0.0;
    for (int i = 0; i < mcp.n_states; ++i) {
        acc += mcp.initial_dist[i];
        if (u < acc) {
            s = i;
            break;
        }
    }

    std::vector<ChordStep> steps;
    for (int t = 0; t < max_steps && !mcp.is_terminal(s); ++t) {
        const Eigen::VectorXd& z = meta.chord(s, task_id);
        const GpiChoice choice = gpi_action_detail(basis, s, z);
        steps.push_back(ChordStep{t, s, z, choice.record, choice.action});

        const auto& out = mcp.outcomes(s, choice.action);
        u = draw();
        acc = 0.0;
        int next = out.back().next;
        for (const auto& o : out) {
            acc += o.prob;
            if (u < acc) {
                next = o.next;
                break;
            }
        }
        s = next;
    }
    return steps;
}

} // namespace okb
