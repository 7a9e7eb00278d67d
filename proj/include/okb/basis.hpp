#pragma once

#include "okb/geometry.hpp"
#include "okb/keyboard.hpp"

#include <functional>
#include <random>

namespace okb {

struct OkbConfig {
    ChordSet chords;
    double tol = 1e-9;
    int max_iters = 20;    // cap on base policies trained
    int okls_iters = 5;    // corner-weight passes per OK-LS call
    enum class Selection { advantage, uniform };
    Selection selection = Selection::advantage;
    std::uint64_t seed = 0;  // uniform-mode sampling
};

struct IterationLog {
    int iter = 0;
    int n_basis = 0;
    int n_support = 0;
    std::optional<Eigen::VectorXd> selected_w;
    std::vector<Eigen::VectorXd> candidates;
    std::vector<Eigen::VectorXd> corners;
    std::vector<double> corner_deltas;
    double max_delta = 0.0;
    // cumulative cost proxies
    int policy_solves = 0;
    int meta_trainings = 0;
    int oracle_solves = 0;
};

struct BasisResult {
    std::vector<SFRecord> basis;
    MetaPolicy meta;
    SFSet partial_ccs;
    std::vector<TaskWeight> weight_support;
    std::vector<IterationLog> log;
    bool truncated = false;
    int basis_version = 0;
    int iterations = 0;  // base policies trained
};

// Snapshot handed to the per-iteration observer right after a base policy
// was trained and the meta-policy refreshed. meta is null for sfols.
struct IterationView {
    int iteration;
    const std::vector<SFRecord>& basis;
    MetaPolicy* meta;
    int basis_version;
};
using IterationObserver = std::function<void(const IterationView&)>;

// One OK-LS call: repeatedly pull corner weights of the partial CCS not yet
// in the support, train the meta-policy on them and fold the resulting SF
// vectors in, pruning dominated ones. On entry, support entries trained
// against an older basis are refreshed first; their new SF vectors are
// unioned in so coverage never regresses. With an empty partial CCS the
// first corner set is the simplex extremes plus the uniform initial task.
void ok_ls(const TabularMCP& mcp, const FeatureMap& features,
           const std::vector<SFRecord>& basis, int basis_version, MetaPolicy& meta,
           SFSet& psi_ok, std::vector<TaskWeight>& support, const OkbConfig& config,
           int& next_ccs_id, int& meta_trainings);

// Candidate selection: highest exact mean-positive advantage, or a seeded
// uniform Dirichlet draw over the simplex that ignores the candidate list.
TaskWeight select_candidate(const std::vector<TaskWeight>& candidates,
                            OkbConfig::Selection mode,
                            const std::vector<double>& mean_positive, int d,
                            std::mt19937_64& rng);

// Option Keyboard Basis: grows a base-policy set until the keyboard can
// express an optimal policy at every corner weight of both the base and the
// keyboard SF sets, checked through exact advantages.
BasisResult okb_run(const TabularMCP& mcp, const FeatureMap& features, const OkbConfig& config,
                    const IterationObserver& observer = {});

struct SfolsResult {
    SFSet ccs;
    std::vector<SFRecord> policies;
    std::vector<IterationLog> log;
    bool truncated = false;
    int iterations = 0;
};

// Optimistic linear support over base policies only: solve the corner task
// with the largest optimality gap until no gap exceeds tol. Returns the CCS.
SfolsResult sfols_run(const TabularMCP& mcp, const FeatureMap& features, const OkbConfig& config,
                      const IterationObserver& observer = {});

} // namespace okb
