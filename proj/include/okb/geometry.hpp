#pragma once

#include "okb/mcp.hpp"

#include <vector>

namespace okb {

// A set of SF vectors with stable policy ids.
struct SFSet {
    std::vector<Eigen::VectorXd> vectors;
    std::vector<int> ids;

    std::size_t size() const { return vectors.size(); }
    bool empty() const { return vectors.empty(); }
    void add(Eigen::VectorXd v, int id) {
        vectors.push_back(std::move(v));
        ids.push_back(id);
    }
    // Adds unless an existing vector matches within tol (L-inf).
    bool add_dedup(const Eigen::VectorXd& v, int id, double tol = 1e-9);
};

struct CornerWeight {
    Eigen::VectorXd w;
    double value;  // upper-envelope value at w
};

// Vertices of the epigraph polyhedron of the scalarized upper envelope over
// the simplex, enumerated by choosing d active constraints among the envelope
// hyperplanes and the w_i = 0 facets and intersecting with the simplex
// equality. Output sorted lexicographically by w, deduplicated within 1e-9.
// Scope: 2 <= d <= 6 and |set| <= 64.
std::vector<CornerWeight> corner_weights(const SFSet& set);

// Keeps a vector iff it attains the scalarized maximum at some corner weight
// within tol. Input order preserved; exact duplicates (within 1e-9) dropped
// first, keeping the earliest id.
SFSet remove_dominated(const SFSet& set, double tol = 1e-9);

struct ScalarizedMax {
    double value;
    int id;
};

// max over the set of psi . w, lowest-id tie-break.
ScalarizedMax scalarized_max(const SFSet& set, const Eigen::VectorXd& w);

// Doubled-feature reformulation that turns a mixed-sign linear task into a
// convex one on [phi; -phi], with rewards scaled down by c = |w|_1.
struct ConvexTransform {
    FeatureMap features;  // dim 2d
    TaskWeight weight;    // convex
    double scale;         // c > 0
};
ConvexTransform linear_to_convex(const FeatureMap& features, const TaskWeight& task);

// All (k_1/H, ..., k_d/H) with nonnegative integers summing to H, first
// coordinate descending; count = C(H+d-1, d-1).
std::vector<Eigen::VectorXd> simplex_grid(int d, int H);

// simplex_grid points expanded to all 2^d sign patterns when signed, then
// L2-normalized and deduplicated within 1e-9.
std::vector<Eigen::VectorXd> chord_grid(int d, int H, bool with_signs);

} // namespace okb
