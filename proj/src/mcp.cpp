#include "okb/mcp.hpp"

#include <cmath>
#include <sstream>

namespace okb {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

} // namespace

void TabularMCP::validate() const {
    if (n_states <= 0 || n_actions <= 0) fail("TabularMCP: n_states and n_actions must be positive");
    if (discount < 0.0 || discount >= 1.0) fail("TabularMCP: discount must lie in [0, 1)");
    if (initial_dist.size() != n_states) fail("TabularMCP: initial_dist size mismatch");
    if (static_cast<int>(terminal.size()) != n_states) fail("TabularMCP: terminal flags size mismatch");
    if (rows.size() != static_cast<std::size_t>(n_states) * n_actions)
        fail("TabularMCP: transition rows size mismatch");

    double mu_sum = 0.0;
    for (int s = 0; s < n_states; ++s) {
        if (initial_dist[s] < 0.0) fail("TabularMCP: initial_dist has a negative entry");
        mu_sum += initial_dist[s];
    }
    if (std::abs(mu_sum - 1.0) > 1e-12) fail("TabularMCP: initial_dist does not sum to 1");

    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            const auto& out = outcomes(s, a);
            if (out.empty()) {
                std::ostringstream os;
                os << "TabularMCP: no outcomes for state " << s << " action " << a;
                fail(os.str());
            }
            double p_sum = 0.0;
            for (const auto& o : out) {
                if (o.next < 0 || o.next >= n_states) fail("TabularMCP: outcome state out of range");
                if (o.prob < 0.0) fail("TabularMCP: negative transition probability");
                p_sum += o.prob;
            }
            if (std::abs(p_sum - 1.0) > 1e-12) {
                std::ostringstream os;
                os << "TabularMCP: row (" << s << ", " << a << ") sums to " << p_sum;
                fail(os.str());
            }
            if (is_terminal(s)) {
                if (out.size() != 1 || out[0].next != s || std::abs(out[0].prob - 1.0) > 1e-12) {
                    std::ostringstream os;
                    os << "TabularMCP: terminal state " << s << " is not absorbing under action " << a;
                    fail(os.str());
                }
            }
        }
    }
}

Eigen::VectorXd FeatureMap::expected(const TabularMCP& mcp, int s, int a) const {
    const auto& out = mcp.outcomes(s, a);
    const Eigen::MatrixXd& phi = at(s, a, mcp.n_actions);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
    for (std::size_t k = 0; k < out.size(); ++k) e += out[k].prob * phi.row(static_cast<int>(k)).transpose();
    return e;
}

void FeatureMap::validate(const TabularMCP& mcp) const {
    if (dim < 1) fail("FeatureMap: dim must be >= 1");
    if (rows.size() != mcp.rows.size()) fail("FeatureMap: row count does not match the MCP");
    for (int s = 0; s < mcp.n_states; ++s) {
        for (int a = 0; a < mcp.n_actions; ++a) {
            const Eigen::MatrixXd& phi = at(s, a, mcp.n_actions);
            if (phi.rows() != static_cast<Eigen::Index>(mcp.outcomes(s, a).size()) || phi.cols() != dim)
                fail("FeatureMap: shape mismatch with the MCP outcome list");
            if (!phi.allFinite()) fail("FeatureMap: non-finite feature entry");
            if (mcp.is_terminal(s) && phi.cwiseAbs().maxCoeff() > 0.0)
                fail("FeatureMap: nonzero features on a transition out of a terminal state");
        }
    }
}

void TaskWeight::validate() const {
    if (w.size() < 1) fail("TaskWeight: empty weight vector");
    if (!w.allFinite()) fail("TaskWeight: non-finite weight entry");
    if (kind == TaskKind::convex) {
        for (Eigen::Index i = 0; i < w.size(); ++i)
            if (w[i] < 0.0) fail("TaskWeight: convex weight has a negative entry");
        if (std::abs(w.sum() - 1.0) > 1e-12) fail("TaskWeight: convex weight does not sum to 1");
    }
}

double RewardTable::expected(const TabularMCP& mcp, int s, int a) const {
    const auto& out = mcp.outcomes(s, a);
    const Eigen::VectorXd& r = at(s, a, mcp.n_actions);
    double e = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) e += out[k].prob * r[static_cast<Eigen::Index>(k)];
    return e;
}

void RewardTable::validate(const TabularMCP& mcp) const {
    if (rows.size() != mcp.rows.size()) fail("RewardTable: row count does not match the MCP");
    for (int s = 0; s < mcp.n_states; ++s) {
        for (int a = 0; a < mcp.n_actions; ++a) {
            const Eigen::VectorXd& r = at(s, a, mcp.n_actions);
            if (r.size() != static_cast<Eigen::Index>(mcp.outcomes(s, a).size()))
                fail("RewardTable: shape mismatch with the MCP outcome list");
            if (!r.allFinite()) fail("RewardTable: non-finite reward entry");
            if (mcp.is_terminal(s) && r.cwiseAbs().maxCoeff() > 0.0)
                fail("RewardTable: nonzero reward on a transition out of a terminal state");
        }
    }
}

RewardTable task_reward(const FeatureMap& features, const TaskWeight& task) {
    if (features.dim != task.w.size()) {
        std::ostringstream os;
        os << "task_reward: feature dim " << features.dim << " != weight dim " << task.w.size();
        fail(os.str());
    }
    RewardTable out;
    out.rows.reserve(features.rows.size());
    for (const auto& phi : features.rows) out.rows.push_back(phi * task.w);
    return out;
}

TaskWeight uniform_task(int dim) {
    TaskWeight t;
    t.w = Eigen::VectorXd::Constant(dim, 1.0 / dim);
    t.kind = TaskKind::convex;
    return t;
}

} // namespace okb
