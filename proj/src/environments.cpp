#include "okb/environments.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace okb {

namespace {

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void add_absorbing(TabularMCP& mcp, FeatureMap& features, int s) {
    for (int a = 0; a < mcp.n_actions; ++a) {
        mcp.outcomes(s, a) = {Outcome{s, 1.0}};
        features.rows[static_cast<std::size_t>(s) * mcp.n_actions + a] =
            Eigen::MatrixXd::Zero(1, features.dim);
    }
    mcp.terminal[static_cast<std::size_t>(s)] = 1;
}

BuiltEnv empty_env(int n_states, int n_actions, int d, double gamma) {
    BuiltEnv env;
    env.mcp.n_states = n_states;
    env.mcp.n_actions = n_actions;
    env.mcp.discount = gamma;
    env.mcp.initial_dist = Eigen::VectorXd::Zero(n_states);
    env.mcp.terminal.assign(n_states, 0);
    env.mcp.rows.resize(static_cast<std::size_t>(n_states) * n_actions);
    env.features.dim = d;
    env.features.rows.resize(env.mcp.rows.size());
    return env;
}

} // namespace

BuiltEnv build_counterexample(double gamma) {
    const int n_states = 5;
    const int n_actions = 4;
    BuiltEnv env = empty_env(n_states, n_actions, 2, gamma);
    env.mcp.initial_dist[0] = 1.0;

    const double arm_features[4][2] = {{0.0, 0.0}, {2.0, 1.0}, {1.0, 2.0}, {1.0, 1.0}};
    for (int a = 0; a < n_actions; ++a) {
        env.mcp.outcomes(0, a) = {Outcome{a + 1, 1.0}};
        Eigen::MatrixXd phi(1, 2);
        phi << arm_features[a][0], arm_features[a][1];
        env.features.rows[static_cast<std::size_t>(a)] = phi;
    }
    for (int s = 1; s < n_states; ++s) add_absorbing(env.mcp, env.features, s);

    env.mcp.validate();
    env.features.validate(env.mcp);
    return env;
}

NonlinearReward counterexample_state_reward(const TabularMCP& mcp) {
    if (mcp.n_states != 5 || mcp.n_actions != 4)
        throw std::invalid_argument("counterexample_state_reward: not the counterexample MCP");
    NonlinearReward r;
    r.table.rows.resize(mcp.rows.size());
    const double arm_reward[4] = {0.0, -3.0, -3.0, 2.0};
    for (int s = 0; s < mcp.n_states; ++s)
        for (int a = 0; a < mcp.n_actions; ++a) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mcp.outcomes(s, a).size()));
            if (s == 0) row[0] = arm_reward[a];
            r.table.rows[static_cast<std::size_t>(s) * mcp.n_actions + a] = row;
        }
    return r;
}

namespace {

struct GridLayout {
    int width, height, items_per_type;
    bool toroidal;
    int n_cells, n_items, n_masks, n_states, sink;
    std::vector<int> item_cell;  // item index -> cell; first k are type 1
    std::vector<int> cell_item;  // cell -> item index or -1

    int item_type(int item) const { return item < items_per_type ? 0 : 1; }
    int state_of(int pos, int mask) const { return pos * n_masks + mask; }

    int move(int pos, int action) const {
        int x = pos % width, y = pos / width;
        int dx = 0, dy = 0;
        switch (action) {
            case 0: dy = -1; break;
            case 1: dy = 1; break;
            case 2: dx = -1; break;
            case 3: dx = 1; break;
        }
        if (toroidal) {
            x = (x + dx + width) % width;
            y = (y + dy + height) % height;
        } else {
            x = std::clamp(x + dx, 0, width - 1);
            y = std::clamp(y + dy, 0, height - 1);
        }
        return y * width + x;
    }
};

GridLayout make_layout(int width, int height, int items_per_type, bool toroidal, std::uint64_t seed) {
    if (width < 1 || height < 1 || items_per_type < 1)
        throw std::invalid_argument("build_item_grid: sizes must be positive");
    GridLayout g;
    g.width = width;
    g.height = height;
    g.items_per_type = items_per_type;
    g.toroidal = toroidal;
    g.n_cells = width * height;
    g.n_items = 2 * items_per_type;
    if (g.n_items > 62) throw std::invalid_argument("build_item_grid: too many items");
    g.n_masks = 1 << g.n_items;
    const long long total = static_cast<long long>(g.n_cells) * g.n_masks + 1;
    if (total > 50000) {
        std::ostringstream os;
        os << "build_item_grid: state space would have " << total
           << " states, beyond the 50000 tabular cap";
        throw std::invalid_argument(os.str());
    }
    if (g.n_cells - 1 < g.n_items)
        throw std::invalid_argument("build_item_grid: grid too small for the items");
    g.n_states = static_cast<int>(total);
    g.sink = g.n_states - 1;

    // Items on distinct cells, excluding the start cell 0.
    std::vector<int> cells;
    for (int c = 1; c < g.n_cells; ++c) cells.push_back(c);
    std::mt19937_64 rng(seed);
    for (int i = 0; i < g.n_items; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (cells.size() - i));
        std::swap(cells[i], cells[j]);
    }
    g.item_cell.assign(cells.begin(), cells.begin() + g.n_items);
    g.cell_item.assign(g.n_cells, -1);
    for (int i = 0; i < g.n_items; ++i) g.cell_item[g.item_cell[i]] = i;
    return g;
}

} // namespace

BuiltEnv build_item_grid(int width, int height, int items_per_type, bool toroidal,
                         std::uint64_t seed, double gamma) {
    const GridLayout g = make_layout(width, height, items_per_type, toroidal, seed);
    const int n_actions = 4;
    BuiltEnv env = empty_env(g.n_states, n_actions, 2, gamma);
    const int full_mask = g.n_masks - 1;
    env.mcp.initial_dist[g.state_of(0, full_mask)] = 1.0;

    for (int pos = 0; pos < g.n_cells; ++pos) {
        for (int mask = 0; mask < g.n_masks; ++mask) {
            const int s = g.state_of(pos, mask);
            if (mask == 0) {  // all items gone: unreachable but kept terminal
                add_absorbing(env.mcp, env.features, s);
                continue;
            }
            for (int a = 0; a < n_actions; ++a) {
                const int npos = g.move(pos, a);
                const int item = g.cell_item[npos];
                int nmask = mask;
                Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(1, 2);
                if (item >= 0 && (mask >> item & 1)) {
                    nmask = mask & ~(1 << item);
                    phi(0, g.item_type(item)) = 1.0;
                }
                const int ns = (nmask == 0) ? g.sink : g.state_of(npos, nmask);
                env.mcp.outcomes(s, a) = {Outcome{ns, 1.0}};
                env.features.rows[static_cast<std::size_t>(s) * n_actions + a] = phi;
            }
        }
    }
    add_absorbing(env.mcp, env.features, g.sink);

    env.mcp.validate();
    env.features.validate(env.mcp);
    return env;
}

NonlinearReward item_grid_sequential_reward(int width, int height, int items_per_type,
                                            bool toroidal, std::uint64_t seed, double gamma) {
    const GridLayout g = make_layout(width, height, items_per_type, toroidal, seed);
    const BuiltEnv env = build_item_grid(width, height, items_per_type, toroidal, seed, gamma);
    const int type1_mask = (1 << items_per_type) - 1;

    NonlinearReward r;
    r.table.rows.resize(env.mcp.rows.size());
    for (int s = 0; s < env.mcp.n_states; ++s) {
        for (int a = 0; a < env.mcp.n_actions; ++a) {
            const std::size_t idx = static_cast<std::size_t>(s) * env.mcp.n_actions + a;
            const Eigen::MatrixXd& phi = env.features.rows[idx];
            Eigen::VectorXd row = Eigen::VectorXd::Zero(phi.rows());
            if (!env.mcp.is_terminal(s)) {
                const int mask = s % g.n_masks;
                const bool type1_left = (mask & type1_mask) != 0;
                for (Eigen::Index k = 0; k < phi.rows(); ++k) {
                    if (phi(k, 0) > 0.5) row[k] = 1.0;                       // type 1 always pays
                    else if (phi(k, 1) > 0.5) row[k] = type1_left ? 0.0 : 1.0;
                }
            }
            r.table.rows[idx] = row;
        }
    }
    return r;
}

BuiltEnv build_random_mcp(std::uint64_t seed, int n_states, int n_actions, int d,
                          double gamma, int branching) {
    if (n_states < 1 || n_actions < 1) throw std::invalid_argument("build_random_mcp: sizes must be positive");
    if (d < 2) throw std::invalid_argument("build_random_mcp: d must be >= 2");
    if (branching < 1 || branching > n_states)
        throw std::invalid_argument("build_random_mcp: branching must lie in [1, n_states]");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("build_random_mcp: gamma must lie in [0, 1)");

    BuiltEnv env = empty_env(n_states, n_actions, d, gamma);
    env.mcp.initial_dist.setConstant(1.0 / n_states);

    std::mt19937_64 rng(seed);
    std::vector<int> order(n_states);
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            for (int i = 0; i < n_states; ++i) order[static_cast<std::size_t>(i)] = i;
            for (int i = 0; i < branching; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng() % (order.size() - i));
                std::swap(order[i], order[j]);
            }
            std::vector<double> mass(branching);
            double total = 0.0;
            for (int i = 0; i < branching; ++i) {
                mass[i] = -std::log(std::max(1e-300, 1.0 - uniform01(rng)));
                total += mass[i];
            }
            auto& out = env.mcp.outcomes(s, a);
            out.resize(branching);
            Eigen::MatrixXd phi(branching, d);
            for (int i = 0; i < branching; ++i) {
                out[i] = Outcome{order[static_cast<std::size_t>(i)],
                                 branching == 1 ? 1.0 : mass[i] / total};
                for (int c = 0; c < d; ++c) phi(i, c) = uniform01(rng);
            }
            env.features.rows[static_cast<std::size_t>(s) * n_actions + a] = phi;
        }
    }

    env.mcp.validate();
    env.features.validate(env.mcp);
    return env;
}

BuiltEnv build_two_corridor(int length, double gamma) {
    if (length < 2) throw std::invalid_argument("build_two_corridor: length must be >= 2");
    const int n_states = 2 * length + 4;
    const int n_actions = 2;
    const int g1 = 2 * length + 1, g2 = 2 * length + 2, sink = 2 * length + 3;
    BuiltEnv env = empty_env(n_states, n_actions, 2, gamma);
    env.mcp.initial_dist[0] = 1.0;

    auto zero_phi = [&](int s, int a) {
        env.features.rows[static_cast<std::size_t>(s) * n_actions + a] = Eigen::MatrixXd::Zero(1, 2);
    };
    auto corridor_state = [&](int corridor, int j) { return 1 + corridor * length + j; };

    env.mcp.outcomes(0, 0) = {Outcome{corridor_state(0, 0), 1.0}};
    env.mcp.outcomes(0, 1) = {Outcome{corridor_state(1, 0), 1.0}};
    zero_phi(0, 0);
    zero_phi(0, 1);

    const double goal_features[2][2] = {{1.0, 0.0}, {-1.0, 1.0}};
    for (int corridor = 0; corridor < 2; ++corridor) {
        for (int j = 0; j < length; ++j) {
            const int s = corridor_state(corridor, j);
            env.mcp.outcomes(s, 0) = {Outcome{sink, 1.0}};  // action 0 drops out
            zero_phi(s, 0);
            if (j + 1 < length) {
                env.mcp.outcomes(s, 1) = {Outcome{corridor_state(corridor, j + 1), 1.0}};
                zero_phi(s, 1);
            } else {
                env.mcp.outcomes(s, 1) = {Outcome{corridor == 0 ? g1 : g2, 1.0}};
                Eigen::MatrixXd phi(1, 2);
                phi << goal_features[corridor][0], goal_features[corridor][1];
                env.features.rows[static_cast<std::size_t>(s) * n_actions + 1] = phi;
            }
        }
    }
    add_absorbing(env.mcp, env.features, g1);
    add_absorbing(env.mcp, env.features, g2);
    add_absorbing(env.mcp, env.features, sink);

    env.mcp.validate();
    env.features.validate(env.mcp);
    return env;
}

} // namespace okb
