#pragma once

#include "okb/mcp.hpp"

#include <cstdint>

namespace okb {

struct BuiltEnv {
    TabularMCP mcp;
    FeatureMap features;
};

// Five-state MDP with one decision state and four one-shot arms into
// terminal states carrying features [0,0], [2,1], [1,2], [1,1]. Arm 4's
// feature lies inside the convex hull of the others, so no unit chord makes
// it the strict GPI argmax.
BuiltEnv build_counterexample(double gamma = 0.9);

// The state-dependent task on the counterexample MDP: arm rewards
// 0, -3, -3, 2. Not linearly expressible in the arm features.
NonlinearReward counterexample_state_reward(const TabularMCP& mcp);

// Grid world where the agent collects items of two types. State =
// (position, item-presence bitmask); collecting the last item enters an
// absorbing sink. d = 2 indicator features, one per item type.
BuiltEnv build_item_grid(int width, int height, int items_per_type, bool toroidal,
                         std::uint64_t seed, double gamma = 0.95);

// Sequential task on the same grid: each collection pays 1, except a type-2
// item collected while any type-1 item remains, which pays 0. Parameters
// must match the build_item_grid call.
NonlinearReward item_grid_sequential_reward(int width, int height, int items_per_type,
                                            bool toroidal, std::uint64_t seed,
                                            double gamma = 0.95);

// Seeded random MCP: each (s, a) has `branching` successors with
// Dirichlet(1,...,1) probabilities; features uniform in [0,1]^d.
BuiltEnv build_random_mcp(std::uint64_t seed, int n_states, int n_actions, int d,
                          double gamma, int branching);

// Two gated corridors from a shared start; payoffs only at the goals
// (corridor 1: [1,0], corridor 2: [-1,1]) and action 0 drops into a sink
// inside both corridors. Any policy optimal for one corridor tie-breaks
// into the sink in the other, so its interior advance SFs vanish and the
// option keyboard cannot traverse the other corridor. |CCS| = 2 and a basis
// of 2 policies is unavoidable.
BuiltEnv build_two_corridor(int length = 2, double gamma = 0.95);

} // namespace okb
