#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace okb {

// One possible successor of a (state, action) pair.
struct Outcome {
    int next;
    double prob;
};

// Finite Markov control process: states, actions, transition kernel, initial
// distribution and discount, but no reward. Rows are stored sparsely: the
// outcomes of (s, a) live at rows[s * n_actions + a].
struct TabularMCP {
    int n_states = 0;
    int n_actions = 0;
    double discount = 0.0;
    Eigen::VectorXd initial_dist;
    std::vector<char> terminal;               // size n_states
    std::vector<std::vector<Outcome>> rows;   // size n_states * n_actions

    const std::vector<Outcome>& outcomes(int s, int a) const {
        return rows[static_cast<std::size_t>(s) * n_actions + a];
    }
    std::vector<Outcome>& outcomes(int s, int a) {
        return rows[static_cast<std::size_t>(s) * n_actions + a];
    }
    bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)] != 0; }

    // Throws std::invalid_argument when any invariant is broken:
    // rows sum to 1 within 1e-12 with nonnegative entries, initial_dist is a
    // distribution, terminal states are absorbing self-loops.
    void validate() const;
};

// Reward features phi(s,a,s') in R^dim, aligned with the MCP's outcome lists:
// rows[s * n_actions + a] has one row per outcome and dim columns.
struct FeatureMap {
    int dim = 0;
    std::vector<Eigen::MatrixXd> rows;

    const Eigen::MatrixXd& at(int s, int a, int n_actions) const {
        return rows[static_cast<std::size_t>(s) * n_actions + a];
    }

    // Expected one-step feature of (s, a) under the transition kernel.
    Eigen::VectorXd expected(const TabularMCP& mcp, int s, int a) const;

    // Alignment with the MCP, finiteness, zero rows out of terminal states.
    void validate(const TabularMCP& mcp) const;
};

enum class TaskKind { convex, linear };

// Weight vector defining a task reward r = phi . w.
struct TaskWeight {
    Eigen::VectorXd w;
    TaskKind kind = TaskKind::convex;

    void validate() const;  // convex => simplex membership within 1e-12
};

// Scalar reward per transition, aligned with the MCP's outcome lists like
// FeatureMap. Used both for linear task rewards and arbitrary ones.
struct RewardTable {
    std::vector<Eigen::VectorXd> rows;

    const Eigen::VectorXd& at(int s, int a, int n_actions) const {
        return rows[static_cast<std::size_t>(s) * n_actions + a];
    }
    double expected(const TabularMCP& mcp, int s, int a) const;
    void validate(const TabularMCP& mcp) const;  // finite, zero out of terminals
};

// A reward table declared not linearly expressible in the feature map.
struct NonlinearReward {
    RewardTable table;
};

// r(s,a,s') = phi(s,a,s') . w for every transition.
// Throws std::invalid_argument naming both dims on mismatch.
RewardTable task_reward(const FeatureMap& features, const TaskWeight& task);

// Uniform convex task [1/d, ..., 1/d].
TaskWeight uniform_task(int dim);

} // namespace okb
