#include "okb/environments.hpp"
#include "okb/geometry.hpp"
#include "okb/planner.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace okb;

namespace {

Eigen::VectorXd vec2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

SFSet make_set(const std::vector<Eigen::VectorXd>& vectors) {
    SFSet set;
    for (std::size_t i = 0; i < vectors.size(); ++i) set.add(vectors[i], static_cast<int>(i));
    return set;
}

bool contains_weight(const std::vector<CornerWeight>& corners, const Eigen::VectorXd& w) {
    for (const auto& cw : corners)
        if ((cw.w - w).cwiseAbs().maxCoeff() < 1e-9) return true;
    return false;
}

double envelope(const SFSet& set, const Eigen::VectorXd& w) {
    double best = set.vectors.front().dot(w);
    for (const auto& v : set.vectors) best = std::max(best, v.dot(w));
    return best;
}

} // namespace

TEST_CASE("corner weights of the two axis vectors") {
    const auto corners = corner_weights(make_set({vec2(1, 0), vec2(0, 1)}));
    CHECK(corners.size() == 3);
    CHECK(contains_weight(corners, vec2(1, 0)));
    CHECK(contains_weight(corners, vec2(0, 1)));
    CHECK(contains_weight(corners, vec2(0.5, 0.5)));
    for (const auto& cw : corners) {
        CHECK(cw.w.minCoeff() >= -1e-9);
        CHECK(std::abs(cw.w.sum() - 1.0) < 1e-9);
    }
}

TEST_CASE("single hyperplane leaves only the simplex extremes") {
    const auto corners = corner_weights(make_set({vec2(1, 1)}));
    CHECK(corners.size() == 2);
    CHECK(contains_weight(corners, vec2(1, 0)));
    CHECK(contains_weight(corners, vec2(0, 1)));
}

TEST_CASE("corner weights are closed under permutation of the input") {
    std::mt19937_64 rng(99);
    auto draw = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 20; ++trial) {
        const int d = 2 + static_cast<int>(rng() % 2);
        const int n = 2 + static_cast<int>(rng() % 5);
        std::vector<Eigen::VectorXd> vectors;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd v(d);
            for (int j = 0; j < d; ++j) v[j] = draw();
            vectors.push_back(v);
        }
        const auto base = corner_weights(make_set(vectors));
        std::vector<Eigen::VectorXd> shuffled = vectors;
        for (std::size_t i = 0; i + 1 < shuffled.size(); ++i)
            std::swap(shuffled[i], shuffled[i + static_cast<std::size_t>(rng() % (shuffled.size() - i))]);
        const auto permuted = corner_weights(make_set(shuffled));
        REQUIRE(base.size() == permuted.size());
        for (const auto& cw : base) CHECK(contains_weight(permuted, cw.w));
    }
}

TEST_CASE("corner weights scope guard") {
    std::vector<Eigen::VectorXd> too_many;
    for (int i = 0; i < 65; ++i) too_many.push_back(vec2(i, -i));
    CHECK_THROWS_WITH_AS(corner_weights(make_set(too_many)), doctest::Contains("scope"),
                         std::invalid_argument);
    Eigen::VectorXd wide = Eigen::VectorXd::Ones(7);
    CHECK_THROWS_WITH_AS(corner_weights(make_set({wide})), doctest::Contains("scope"),
                         std::invalid_argument);
}

TEST_CASE("grid maximizer of the optimality gap never beats the corner weights") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const BuiltEnv env = build_random_mcp(seed, 10, 3, 3, 0.9, 2);
        SFSet psi;
        int id = 0;
        for (const auto& w : simplex_grid(3, 2)) {  // 6 base tasks
            if (id >= 5) break;
            TaskWeight task{w, TaskKind::convex};
            const PlanResult plan = solve_task(env.mcp, task_reward(env.features, task));
            psi.add_dedup(policy_successor_features(env.mcp, env.features, plan.policy).sf_vector,
                          id++);
        }
        const auto corners = corner_weights(psi);
        double best_corner_delta = 0.0;
        for (const auto& cw : corners) {
            TaskWeight task{cw.w, TaskKind::convex};
            const double vstar = solve_task(env.mcp, task_reward(env.features, task)).v_mu;
            best_corner_delta = std::max(best_corner_delta, vstar - envelope(psi, cw.w));
        }
        for (const auto& w : simplex_grid(3, 19)) {  // 210-point dense grid
            TaskWeight task{w, TaskKind::convex};
            const double vstar = solve_task(env.mcp, task_reward(env.features, task)).v_mu;
            CHECK(vstar - envelope(psi, w) <= best_corner_delta + 1e-9);
        }
    }
}

TEST_CASE("remove_dominated drops interior vectors and keeps envelope ties") {
    const SFSet pruned = remove_dominated(make_set({vec2(1, 0), vec2(0, 1), vec2(0.4, 0.4)}));
    CHECK(pruned.size() == 2);
    CHECK(pruned.ids == std::vector<int>{0, 1});

    const SFSet single = remove_dominated(make_set({vec2(0.3, 0.3)}));
    CHECK(single.size() == 1);

    // a vector tying the envelope on a full-dimensional region stays
    const SFSet tied = remove_dominated(make_set({vec2(1, 0), vec2(0, 1), vec2(0.5, 0.5)}));
    CHECK(tied.size() == 3);
}

TEST_CASE("remove_dominated is idempotent and preserves corner values") {
    std::mt19937_64 rng(1234);
    auto draw = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 5);
        std::vector<Eigen::VectorXd> vectors;
        for (int i = 0; i < n; ++i) vectors.push_back(vec2(draw(), draw()));
        const SFSet original = make_set(vectors);
        const SFSet once = remove_dominated(original);
        const SFSet twice = remove_dominated(once);
        REQUIRE(once.size() == twice.size());
        for (std::size_t i = 0; i < once.size(); ++i)
            CHECK((once.vectors[i] - twice.vectors[i]).cwiseAbs().maxCoeff() == 0.0);

        for (const auto& cw : corner_weights(original))
            CHECK(envelope(once, cw.w) == doctest::Approx(envelope(original, cw.w)).epsilon(1e-12));
    }
}

TEST_CASE("pruning handles sets beyond the single-shot enumeration scope") {
    std::mt19937_64 rng(2024);
    auto draw = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    SFSet big;
    for (int i = 0; i < 80; ++i) big.add(vec2(draw(), draw()), i);

    const SFSet pruned = remove_dominated(big);
    CHECK(pruned.size() < big.size());
    for (const auto& w : simplex_grid(2, 200))
        CHECK(envelope(pruned, w) == doctest::Approx(envelope(big, w)).epsilon(1e-12));

    const SFSet again = remove_dominated(pruned);
    REQUIRE(again.size() == pruned.size());
    for (std::size_t i = 0; i < again.size(); ++i) CHECK(again.ids[i] == pruned.ids[i]);
}

TEST_CASE("scalarized_max picks the best vector with lowest-id ties") {
    const SFSet set = make_set({vec2(1, 0), vec2(0, 1)});
    Eigen::VectorXd w = vec2(0.25, 0.75);
    const ScalarizedMax best = scalarized_max(set, w);
    CHECK(best.value == doctest::Approx(0.75));
    CHECK(best.id == 1);

    const ScalarizedMax tie = scalarized_max(set, vec2(0.5, 0.5));
    CHECK(tie.value == doctest::Approx(0.5));
    CHECK(tie.id == 0);

    CHECK_THROWS_AS(scalarized_max(set, Eigen::VectorXd::Ones(3)), std::invalid_argument);
}

TEST_CASE("linear_to_convex rebuilds the reward scaled by the weight mass") {
    const BuiltEnv env = build_counterexample();

    TaskWeight mixed{vec2(1, -1), TaskKind::linear};
    const ConvexTransform t = linear_to_convex(env.features, mixed);
    CHECK(t.scale == doctest::Approx(2.0));
    CHECK(t.weight.w.size() == 4);
    CHECK(t.weight.w[0] == doctest::Approx(0.5));
    CHECK(t.weight.w[1] == 0.0);
    CHECK(t.weight.w[2] == 0.0);
    CHECK(t.weight.w[3] == doctest::Approx(0.5));

    // already-convex weights pass through with scale 1
    TaskWeight plain{vec2(0.5, 0.5), TaskKind::convex};
    const ConvexTransform id = linear_to_convex(env.features, plain);
    CHECK(id.scale == doctest::Approx(1.0));
    const RewardTable before = task_reward(env.features, plain);
    const RewardTable after = task_reward(id.features, id.weight);
    for (std::size_t i = 0; i < before.rows.size(); ++i)
        CHECK((before.rows[i] - after.rows[i]).cwiseAbs().maxCoeff() < 1e-12);

    CHECK_THROWS_AS(linear_to_convex(env.features, TaskWeight{vec2(0, 0), TaskKind::linear}),
                    std::invalid_argument);
}

TEST_CASE("linear_to_convex preserves greedy argmax sets under exact planning") {
    // the counterexample task [-1,-1] plus random mixed-sign tasks
    {
        const BuiltEnv env = build_counterexample();
        TaskWeight task{vec2(-1, -1), TaskKind::linear};
        const PlanResult base = solve_task(env.mcp, task_reward(env.features, task));
        const ConvexTransform t = linear_to_convex(env.features, task);
        const PlanResult conv = solve_task(env.mcp, task_reward(t.features, t.weight));
        CHECK(base.policy == conv.policy);
    }
    std::mt19937_64 rng(7);
    auto draw = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
    for (int trial = 0; trial < 10; ++trial) {
        const BuiltEnv env = build_random_mcp(100 + trial, 8, 3, 2, 0.9, 2);
        TaskWeight task{vec2(draw(), draw()), TaskKind::linear};
        if (task.w.cwiseAbs().maxCoeff() < 1e-6) continue;
        const RewardTable base_reward = task_reward(env.features, task);
        const PlanResult base = solve_task(env.mcp, base_reward);
        const ConvexTransform t = linear_to_convex(env.features, task);
        const RewardTable conv_reward = task_reward(t.features, t.weight);
        const PlanResult conv = solve_task(env.mcp, conv_reward);

        for (std::size_t i = 0; i < base_reward.rows.size(); ++i)
            CHECK((base_reward.rows[i] / t.scale - conv_reward.rows[i]).cwiseAbs().maxCoeff() <
                  1e-12);
        for (int s = 0; s < env.mcp.n_states; ++s) {
            const double m0 = base.q.row(s).maxCoeff(), m1 = conv.q.row(s).maxCoeff();
            for (int a = 0; a < env.mcp.n_actions; ++a)
                CHECK((base.q(s, a) >= m0 - 1e-9) == (conv.q(s, a) >= m1 - 1e-9));
        }
    }
}

TEST_CASE("simplex grid enumerates lattice weights, first coordinate descending") {
    const auto grid = simplex_grid(2, 4);
    REQUIRE(grid.size() == 5);
    CHECK((grid[0] - vec2(1, 0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((grid[1] - vec2(0.75, 0.25)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((grid[2] - vec2(0.5, 0.5)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((grid[3] - vec2(0.25, 0.75)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((grid[4] - vec2(0, 1)).cwiseAbs().maxCoeff() == 0.0);

    CHECK(simplex_grid(3, 2).size() == 6);
    CHECK(simplex_grid(4, 5).size() == 56);

    for (const auto& w : simplex_grid(3, 7)) {
        long long total = 0;
        for (int i = 0; i < 3; ++i) total += std::llround(w[i] * 7);
        CHECK(total == 7);
        CHECK(std::abs(w.sum() - 1.0) < 1e-15);
    }
}

TEST_CASE("chord grid covers sign patterns with unit norm") {
    const auto plain = chord_grid(2, 1, false);
    REQUIRE(plain.size() == 2);
    CHECK((plain[0] - vec2(1, 0)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((plain[1] - vec2(0, 1)).cwiseAbs().maxCoeff() == 0.0);

    const auto sgn = chord_grid(2, 2, true);
    auto has = [&](const Eigen::VectorXd& z) {
        for (const auto& c : sgn)
            if ((c - z).cwiseAbs().maxCoeff() < 1e-9) return true;
        return false;
    };
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(has(vec2(-1, 0)));
    CHECK(has(vec2(0, -1)));
    CHECK(has(vec2(r, r)));
    CHECK(has(vec2(-r, -r)));
    for (const auto& z : sgn) CHECK(std::abs(z.norm() - 1.0) < 1e-12);

    // pairwise distinct
    for (std::size_t i = 0; i < sgn.size(); ++i)
        for (std::size_t j = i + 1; j < sgn.size(); ++j)
            CHECK((sgn[i] - sgn[j]).cwiseAbs().maxCoeff() >= 1e-9);
}
