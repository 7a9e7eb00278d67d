#pragma once

#include "okb/planner.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace okb {

// Finite set of unit preference vectors the meta-policy can pick from.
struct ChordSet {
    std::vector<Eigen::VectorXd> chords;

    void validate() const;  // unit norm within 1e-12, pairwise distinct
};

// One task registered in a meta-policy: either a weight vector or one
// arbitrary reward table. Linear tasks get their own normalized weight as an
// extra chord (index == |grid|), so the fixed-chord GPI policy is always in
// the searched class.
struct MetaTask {
    std::optional<TaskWeight> weight;
    std::optional<NonlinearReward> reward;
    Eigen::VectorXd task_chord;
    std::vector<int> chord_choice;  // per state
    double value = 0.0;             // v_mu of the induced flat policy at train time
    int basis_version = -1;
};

// Table mapping (state, task) to a chord over a fixed basis.
struct MetaPolicy {
    ChordSet chords;
    std::vector<MetaTask> tasks;

    int find_linear_task(const Eigen::VectorXd& w, double tol = 1e-9) const;
    const Eigen::VectorXd& chord(int s, int task_id) const;
    bool has_nonlinear() const;
    void check_task(int task_id) const;
};

// Trains the chord table for one task by exactly solving the derived MDP
// whose actions are chords (each chord acts through the GPI action it
// induces). Returns the task id in the registry; retrains an existing entry
// when the basis version moved.
int register_linear_task(const TabularMCP& mcp, const FeatureMap& features,
                         const std::vector<SFRecord>& basis, MetaPolicy& meta,
                         const TaskWeight& task, double tol = 1e-9, int basis_version = 0);
int register_nonlinear_task(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                            MetaPolicy& meta, const NonlinearReward& reward,
                            double tol = 1e-9, int basis_version = 0);

// Fresh meta-policy trained on a batch of linear tasks, or on one arbitrary
// reward table.
MetaPolicy train_meta_policy(const TabularMCP& mcp, const FeatureMap& features,
                             const std::vector<SFRecord>& basis,
                             const std::vector<TaskWeight>& tasks, ChordSet chords,
                             double tol = 1e-9);
MetaPolicy train_meta_policy(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                             const NonlinearReward& reward, ChordSet chords,
                             double tol = 1e-9);

// GPI action under the task's trained chord at this state.
int ok_action(const std::vector<SFRecord>& basis, const MetaPolicy& meta, int s, int task_id);

// The flat policy the keyboard induces for a task.
std::vector<int> ok_flat_policy(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                                const MetaPolicy& meta, int task_id);

// Exact SFs of the induced flat policy.
SFRecord ok_policy_successor_features(const TabularMCP& mcp, const FeatureMap& features,
                                      const std::vector<SFRecord>& basis,
                                      const MetaPolicy& meta, int task_id);

// Exact advantages of every (s, a) against the keyboard policy's value.
// A strictly positive entry proves the action is not expressible by any
// chord over this basis (for a converged meta-policy).
struct AdvantageReport {
    Eigen::MatrixXd advantage;                 // n_states x n_actions
    double max_positive = 0.0;                 // max over the table
    double mean_positive = 0.0;                // mean of strictly positive entries, 0 when none
    std::vector<std::pair<int, int>> witnesses;  // (s, a) with advantage > tol
};
AdvantageReport advantage_report(const TabularMCP& mcp, const RewardTable& reward,
                                 const std::vector<SFRecord>& basis, const MetaPolicy& meta,
                                 int task_id, double tol = 1e-9);

// One rollout of the keyboard policy, recording the chord, the winning base
// policy and the primitive action per step.
struct ChordStep {
    int step;
    int state;
    Eigen::VectorXd z;
    int record;
    int action;
};
std::vector<ChordStep> chord_trajectory(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                                        const MetaPolicy& meta, int task_id, int max_steps,
                                        std::uint64_t seed);

} // namespace okb
