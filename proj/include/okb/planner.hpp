#pragma once

#include "okb/mcp.hpp"

#include <optional>
#include <vector>

namespace okb {

// Exact action values and greedy policy for one task.
struct PlanResult {
    Eigen::MatrixXd q;          // n_states x n_actions
    std::vector<int> policy;    // greedy, lowest-index tie-break
    double v_mu = 0.0;
};

// A base policy with its exact successor features.
struct SFRecord {
    std::vector<int> policy;
    Eigen::MatrixXd sf_table;   // (n_states * n_actions) x d
    Eigen::VectorXd sf_vector;  // d
    std::optional<TaskWeight> source_task;

    const auto sf(int s, int a, int n_actions) const {
        return sf_table.row(static_cast<Eigen::Index>(s) * n_actions + a);
    }
};

struct FlatEvaluation {
    Eigen::MatrixXd q;
    Eigen::VectorXd v;          // v[s] = q(s, policy[s])
    double v_mu = 0.0;
};

// Exact policy evaluation of a deterministic policy: one linear solve of
// (I - gamma P_pi) v = r_pi, then a single backup for the q table.
FlatEvaluation evaluate_flat_policy(const TabularMCP& mcp, const RewardTable& reward,
                                    const std::vector<int>& policy);

// Exact solve by policy iteration with linear-solve evaluations. The returned
// q has sup-norm Bellman residual below tol * (1 - gamma).
PlanResult solve_task(const TabularMCP& mcp, const RewardTable& reward, double tol = 1e-10);

// Exact SFs of a policy: d coupled linear systems (I - gamma P_pi) X = Phi_pi,
// one per feature channel; sf_vector is the initial-distribution expectation.
SFRecord policy_successor_features(const TabularMCP& mcp, const FeatureMap& features,
                                   const std::vector<int>& policy,
                                   std::optional<TaskWeight> source_task = std::nullopt);

// argmax_a max_record psi(s,a).z; ties broken by lowest record index, then
// lowest action index.
int gpi_action(const std::vector<SFRecord>& basis, int s, const Eigen::VectorXd& z);

// Same argmax, also reporting which record attained it.
struct GpiChoice {
    int action;
    int record;
};
GpiChoice gpi_action_detail(const std::vector<SFRecord>& basis, int s, const Eigen::VectorXd& z);

// Flat policy induced by GPI with a fixed preference vector.
std::vector<int> gpi_flat_policy(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                                 const Eigen::VectorXd& z);

// Optimality-gap bound for the GPI policy on task w given base tasks {w_i}:
// lhs = max_{s,a} (q*_w - q^GPI_w), rhs = 2/(1-gamma) (phi_max min_i |w-w_i| + eps)
// with phi_max the largest expected one-step feature norm. Throws NumericError
// if lhs exceeds rhs + 1e-9.
struct GapBound {
    double lhs;
    double rhs;
};
GapBound gpi_gap_bound(const TabularMCP& mcp, const FeatureMap& features,
                       const std::vector<SFRecord>& basis, const TaskWeight& task,
                       double eps = 0.0);

} // namespace okb
