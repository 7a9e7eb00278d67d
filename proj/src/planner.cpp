#include "okb/planner.hpp"

#include "okb/errors.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <sstream>

namespace okb {

namespace {

constexpr double kSwitchMargin = 1e-13;  // strict-improvement threshold in policy iteration
constexpr int kMaxPolicyIterations = 10000;

Eigen::MatrixXd policy_transition(const TabularMCP& mcp, const std::vector<int>& policy) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(mcp.n_states, mcp.n_states);
    for (int s = 0; s < mcp.n_states; ++s)
        for (const auto& o : mcp.outcomes(s, policy[static_cast<std::size_t>(s)])) P(s, o.next) += o.prob;
    return P;
}

void check_policy(const TabularMCP& mcp, const std::vector<int>& policy) {
    if (policy.size() != static_cast<std::size_t>(mcp.n_states))
        throw std::invalid_argument("policy size does not match n_states");
    for (int s = 0; s < mcp.n_states; ++s) {
        const int a = policy[static_cast<std::size_t>(s)];
        if (a < 0 || a >= mcp.n_actions) throw std::invalid_argument("policy action out of range");
    }
}

} // namespace

FlatEvaluation evaluate_flat_policy(const TabularMCP& mcp, const RewardTable& reward,
                                    const std::vector<int>& policy) {
    check_policy(mcp, policy);
    const double gamma = mcp.discount;

    Eigen::VectorXd r_pi(mcp.n_states);
    for (int s = 0; s < mcp.n_states; ++s)
        r_pi[s] = reward.expected(mcp, s, policy[static_cast<std::size_t>(s)]);
    if (!r_pi.allFinite()) throw std::invalid_argument("evaluate_flat_policy: non-finite reward entries");

    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(mcp.n_states, mcp.n_states) - gamma * policy_transition(mcp, policy);
    FlatEvaluation out;
    out.v = A.partialPivLu().solve(r_pi);
    if (!out.v.allFinite()) throw NumericError("evaluate_flat_policy: singular evaluation system");

    out.q.resize(mcp.n_states, mcp.n_actions);
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a) {
            double backup = reward.expected(mcp, s, a);
            for (const auto& o : mcp.outcomes(s, a)) backup += gamma * o.prob * out.v[o.next];
            out.q(s, a) = backup;
        }
    out.v_mu = mcp.initial_dist.dot(out.v);
    return out;
}

PlanResult solve_task(const TabularMCP& mcp, const RewardTable& reward, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("solve_task: tol must be positive");
    for (const auto& row : reward.rows)
        if (!row.allFinite()) throw std::invalid_argument("solve_task: non-finite reward entries");

    std::vector<int> policy(static_cast<std::size_t>(mcp.n_states), 0);
    FlatEvaluation eval;
    for (int iter = 0;; ++iter) {
        if (iter >= kMaxPolicyIterations)
            throw NumericError("solve_task: policy iteration failed to converge");
        eval = evaluate_flat_policy(mcp, reward, policy);
        bool changed = false;
        for (int s = 0; s < mcp.n_states; ++s) {
            const int cur = policy[static_cast<std::size_t>(s)];
            int best = cur;
            double best_q = eval.q(s, cur);
            for (int a = 0; a < mcp.n_actions; ++a)
                if (eval.q(s, a) > best_q + kSwitchMargin) {
                    best = a;
                    best_q = eval.q(s, a);
                }
            if (best != cur) {
                policy[static_cast<std::size_t>(s)] = best;
                changed = true;
            }
        }
        if (!changed) break;
    }

    PlanResult result;
    result.q = eval.q;
    result.policy.resize(static_cast<std::size_t>(mcp.n_states));
    for (int s = 0; s < mcp.n_states; ++s) {
        int best = 0;
        for (int a = 1; a < mcp.n_actions; ++a)
            if (result.q(s, a) > result.q(s, best)) best = a;
        result.policy[static_cast<std::size_t>(s)] = best;
    }
    result.v_mu = mcp.initial_dist.dot(eval.v);

    // Bellman residual of the returned table.
    double residual = 0.0;
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a) {
            double backup = reward.expected(mcp, s, a);
            for (const auto& o : mcp.outcomes(s, a))
                backup += mcp.discount * o.prob * result.q.row(o.next).maxCoeff();
            residual = std::max(residual, std::abs(backup - result.q(s, a)));
        }
    if (residual >= tol * (1.0 - mcp.discount)) {
        std::ostringstream os;
        os << "solve_task: Bellman residual " << residual << " exceeds " << tol * (1.0 - mcp.discount);
        throw NumericError(os.str());
    }
    return result;
}

SFRecord policy_successor_features(const TabularMCP& mcp, const FeatureMap& features,
                                   const std::vector<int>& policy,
                                   std::optional<TaskWeight> source_task) {
    check_policy(mcp, policy);
    const double gamma = mcp.discount;
    const int d = features.dim;

    Eigen::MatrixXd phi_pi(mcp.n_states, d);
    for (int s = 0; s < mcp.n_states; ++s)
        phi_pi.row(s) = features.expected(mcp, s, policy[static_cast<std::size_t>(s)]).transpose();

    const Eigen::MatrixXd A =
        Eigen::MatrixXd::Identity(mcp.n_states, mcp.n_states) - gamma * policy_transition(mcp, policy);
    const Eigen::MatrixXd X = A.partialPivLu().solve(phi_pi);  // X.row(s) = psi(s, pi(s))
    if (!X.allFinite()) throw NumericError("policy_successor_features: singular system");

    SFRecord rec;
    rec.policy = policy;
    rec.source_task = std::move(source_task);
    rec.sf_table.resize(static_cast<Eigen::Index>(mcp.n_states) * mcp.n_actions, d);
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a) {
            Eigen::VectorXd psi = features.expected(mcp, s, a);
            for (const auto& o : mcp.outcomes(s, a)) psi += gamma * o.prob * X.row(o.next).transpose();
            rec.sf_table.row(static_cast<Eigen::Index>(s) * mcp.n_actions + a) = psi.transpose();
        }

    rec.sf_vector = Eigen::VectorXd::Zero(d);
    for (int s = 0; s < mcp.n_states; ++s)
        rec.sf_vector += mcp.initial_dist[s] * X.row(s).transpose();

    // SF Bellman identity must hold to 1e-9 per entry.
    double residual = 0.0;
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a) {
            Eigen::VectorXd backup = features.expected(mcp, s, a);
            for (const auto& o : mcp.outcomes(s, a)) {
                const int sp = o.next;
                backup += gamma * o.prob *
                          rec.sf(sp, policy[static_cast<std::size_t>(sp)], mcp.n_actions).transpose();
            }
            residual = std::max(
                residual,
                (backup.transpose() - rec.sf(s, a, mcp.n_actions)).cwiseAbs().maxCoeff());
        }
    if (residual >= 1e-9) {
        std::ostringstream os;
        os << "policy_successor_features: SF Bellman residual " << residual;
        throw NumericError(os.str());
    }
    return rec;
}

GpiChoice gpi_action_detail(const std::vector<SFRecord>& basis, int s, const Eigen::VectorXd& z) {
    if (basis.empty()) throw std::invalid_argument("gpi_action: empty basis");
    const Eigen::Index d = basis.front().sf_table.cols();
    if (z.size() != d) {
        std::ostringstream os;
        os << "gpi_action: chord dim " << z.size() << " != SF dim " << d;
        throw std::invalid_argument(os.str());
    }
    const int n_actions =
        static_cast<int>(basis.front().sf_table.rows() / static_cast<Eigen::Index>(basis.front().policy.size()));

    GpiChoice best{0, 0};
    double best_val = -std::numeric_limits<double>::infinity();
    for (int rec = 0; rec < static_cast<int>(basis.size()); ++rec)
        for (int a = 0; a < n_actions; ++a) {
            const double val = basis[static_cast<std::size_t>(rec)].sf(s, a, n_actions).dot(z);
            if (val > best_val) {
                best_val = val;
                best = GpiChoice{a, rec};
            }
        }
    return best;
}

int gpi_action(const std::vector<SFRecord>& basis, int s, const Eigen::VectorXd& z) {
    return gpi_action_detail(basis, s, z).action;
}

std::vector<int> gpi_flat_policy(const TabularMCP& mcp, const std::vector<SFRecord>& basis,
                                 const Eigen::VectorXd& z) {
    std::vector<int> policy(static_cast<std::size_t>(mcp.n_states), 0);
    for (int s = 0; s < mcp.n_states; ++s)
        if (!mcp.is_terminal(s)) policy[static_cast<std::size_t>(s)] = gpi_action(basis, s, z);
    return policy;
}

GapBound gpi_gap_bound(const TabularMCP& mcp, const FeatureMap& features,
                       const std::vector<SFRecord>& basis, const TaskWeight& task,
                       double eps) {
    if (basis.empty()) throw std::invalid_argument("gpi_gap_bound: empty basis");
    if (eps < 0.0) throw std::invalid_argument("gpi_gap_bound: eps must be >= 0");
    for (const auto& rec : basis)
        if (!rec.source_task)
            throw std::invalid_argument("gpi_gap_bound: a record is missing its source task");

    const RewardTable reward = task_reward(features, task);
    const PlanResult opt = solve_task(mcp, reward);
    const FlatEvaluation gpi = evaluate_flat_policy(mcp, reward, gpi_flat_policy(mcp, basis, task.w));

    GapBound out;
    out.lhs = (opt.q - gpi.q).maxCoeff();

    double phi_max = 0.0;
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a)
            phi_max = std::max(phi_max, features.expected(mcp, s, a).norm());
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto& rec : basis) min_dist = std::min(min_dist, (task.w - rec.source_task->w).norm());

    out.rhs = 2.0 / (1.0 - mcp.discount) * (phi_max * min_dist + eps);
    if (out.lhs > out.rhs + 1e-9) {
        std::ostringstream os;
        os << "gpi_gap_bound: gap " << out.lhs << " exceeds bound " << out.rhs;
        throw NumericError(os.str());
    }
    return out;
}

} // namespace okb
