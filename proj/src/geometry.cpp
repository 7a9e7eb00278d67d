#include "okb/geometry.hpp"

#include "okb/errors.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace okb {

namespace {

constexpr double kFeasTol = 1e-9;

bool close_linf(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
    return a.size() == b.size() && (a - b).cwiseAbs().maxCoeff() < tol;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) return true;
        if (a[i] > b[i]) return false;
    }
    return false;
}

void check_dims(const SFSet& set) {
    if (set.empty()) throw std::invalid_argument("corner_weights: empty SF set");
    const Eigen::Index d = set.vectors.front().size();
    for (const auto& v : set.vectors)
        if (v.size() != d) throw std::invalid_argument("SFSet: mixed vector dimensions");
    if (d < 2 || d > 6 || set.size() > 64) {
        std::ostringstream os;
        os << "corner_weights: scope is 2 <= d <= 6 and |set| <= 64, got d=" << d
           << " |set|=" << set.size();
        throw std::invalid_argument(os.str());
    }
}

} // namespace

bool SFSet::add_dedup(const Eigen::VectorXd& v, int id, double tol) {
    for (const auto& u : vectors)
        if (close_linf(u, v, tol)) return false;
    add(v, id);
    return true;
}

std::vector<CornerWeight> corner_weights(const SFSet& set) {
    check_dims(set);
    const int d = static_cast<int>(set.vectors.front().size());
    const int n = static_cast<int>(set.size());
    const int n_cons = n + d;  // envelope rows then sign facets

    // Active-set row for constraint c in the (w, v) space.
    auto fill_row = [&](int c, Eigen::RowVectorXd& row) {
        row.setZero();
        if (c < n) {
            row.head(d) = set.vectors[static_cast<std::size_t>(c)].transpose();
            row[d] = -1.0;
        } else {
            row[c - n] = 1.0;
        }
    };

    std::vector<CornerWeight> found;
    std::vector<int> pick(static_cast<std::size_t>(d));
    Eigen::MatrixXd M(d + 1, d + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d + 1);
    b[d] = 1.0;
    M.row(d).setOnes();
    M(d, d) = 0.0;

    // Iterate d-subsets of the constraints.
    for (int i = 0; i < d; ++i) pick[static_cast<std::size_t>(i)] = i;
    while (true) {
        Eigen::RowVectorXd row(d + 1);
        for (int i = 0; i < d; ++i) {
            fill_row(pick[static_cast<std::size_t>(i)], row);
            M.row(i) = row;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (lu.isInvertible()) {
            const Eigen::VectorXd x = lu.solve(b);
            bool feasible = x.allFinite();
            if (feasible)
                for (int j = 0; j < d && feasible; ++j) feasible = x[j] >= -kFeasTol;
            if (feasible) {
                const double v = x[d];
                for (int i = 0; i < n && feasible; ++i)
                    feasible = set.vectors[static_cast<std::size_t>(i)].dot(x.head(d)) <= v + kFeasTol;
                if (feasible) {
                    CornerWeight cw;
                    cw.w = x.head(d).cwiseMax(0.0);
                    double env = set.vectors.front().dot(cw.w);
                    for (int i = 1; i < n; ++i)
                        env = std::max(env, set.vectors[static_cast<std::size_t>(i)].dot(cw.w));
                    cw.value = env;
                    found.push_back(std::move(cw));
                }
            }
        }
        // next subset
        int i = d - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == n_cons - d + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < d; ++j)
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
    }

    std::stable_sort(found.begin(), found.end(),
                     [](const CornerWeight& a, const CornerWeight& b) { return lex_less(a.w, b.w); });
    std::vector<CornerWeight> out;
    for (auto& cw : found) {
        bool dup = false;
        for (const auto& kept : out)
            if (close_linf(kept.w, cw.w, 1e-9)) {
                dup = true;
                break;
            }
        if (!dup) out.push_back(std::move(cw));
    }
    return out;
}

namespace {

// Corner-weight scan on a set within the enumeration scope.
SFSet prune_by_corner_scan(const SFSet& unique, double tol) {
    const auto corners = corner_weights(unique);
    SFSet out;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        bool keep = false;
        for (const auto& cw : corners) {
            double best = unique.vectors.front().dot(cw.w);
            for (const auto& v : unique.vectors) best = std::max(best, v.dot(cw.w));
            if (unique.vectors[i].dot(cw.w) >= best - std::max(tol, 1e-12)) {
                keep = true;
                break;
            }
        }
        if (keep) out.add(unique.vectors[i], unique.ids[i]);
    }
    return out;
}

} // namespace

SFSet remove_dominated(const SFSet& set, double tol) {
    if (tol < 0.0) throw std::invalid_argument("remove_dominated: tol must be >= 0");
    if (set.empty()) return set;

    SFSet unique;
    for (std::size_t i = 0; i < set.size(); ++i)
        unique.add_dedup(set.vectors[i], set.ids[i]);
    if (unique.size() == 1) return unique;
    if (unique.size() <= 64) return prune_by_corner_scan(unique, tol);

    // Larger inputs are pruned incrementally: a vector dominated within a
    // subset stays dominated in the full set, so the working set holds only
    // survivors and stays within the enumeration scope unless the pruned set
    // itself exceeds it.
    SFSet work;
    for (std::size_t i = 0; i < unique.size(); ++i) {
        work.add(unique.vectors[i], unique.ids[i]);
        if (work.size() >= 2) work = prune_by_corner_scan(work, tol);
    }
    return work;
}

ScalarizedMax scalarized_max(const SFSet& set, const Eigen::VectorXd& w) {
    if (set.empty()) throw std::invalid_argument("scalarized_max: empty SF set");
    if (set.vectors.front().size() != w.size()) {
        std::ostringstream os;
        os << "scalarized_max: weight dim " << w.size() << " != SF dim "
           << set.vectors.front().size();
        throw std::invalid_argument(os.str());
    }
    ScalarizedMax best{set.vectors.front().dot(w), set.ids.front()};
    for (std::size_t i = 1; i < set.size(); ++i) {
        const double val = set.vectors[i].dot(w);
        if (val > best.value) best = ScalarizedMax{val, set.ids[i]};
    }
    return best;
}

ConvexTransform linear_to_convex(const FeatureMap& features, const TaskWeight& task) {
    if (features.dim != task.w.size())
        throw std::invalid_argument("linear_to_convex: feature/weight dim mismatch");
    if (task.w.cwiseAbs().maxCoeff() == 0.0)
        throw std::invalid_argument("linear_to_convex: zero weight is a degenerate task");

    const Eigen::VectorXd w_pos = task.w.cwiseMax(0.0);
    const Eigen::VectorXd w_neg = (-task.w).cwiseMax(0.0);
    const double c = w_pos.sum() + w_neg.sum();

    ConvexTransform out;
    out.scale = c;
    out.weight.kind = TaskKind::convex;
    out.weight.w.resize(2 * features.dim);
    out.weight.w << w_pos / c, w_neg / c;

    out.features.dim = 2 * features.dim;
    out.features.rows.reserve(features.rows.size());
    for (const auto& phi : features.rows) {
        Eigen::MatrixXd doubled(phi.rows(), 2 * features.dim);
        doubled << phi, -phi;
        out.features.rows.push_back(std::move(doubled));
    }
    return out;
}

std::vector<Eigen::VectorXd> simplex_grid(int d, int H) {
    if (d < 1 || H < 1) throw std::invalid_argument("simplex_grid: d and H must be >= 1");
    std::vector<Eigen::VectorXd> out;
    Eigen::VectorXd w(d);
    std::vector<int> k(static_cast<std::size_t>(d), 0);

    // Recursive composition of H into d parts, first coordinate descending.
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == d - 1) {
            k[static_cast<std::size_t>(pos)] = remaining;
            for (int i = 0; i < d; ++i) w[i] = static_cast<double>(k[static_cast<std::size_t>(i)]) / H;
            out.push_back(w);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            k[static_cast<std::size_t>(pos)] = v;
            self(self, pos + 1, remaining - v);
        }
    };
    rec(rec, 0, H);
    return out;
}

std::vector<Eigen::VectorXd> chord_grid(int d, int H, bool with_signs) {
    const auto base = simplex_grid(d, H);
    const int patterns = with_signs ? (1 << d) : 1;
    std::vector<Eigen::VectorXd> out;
    for (const auto& p : base) {
        for (int bits = 0; bits < patterns; ++bits) {
            Eigen::VectorXd z = p;
            for (int i = 0; i < d; ++i)
                if (bits >> i & 1) z[i] = -z[i];
            const double norm = z.norm();
            if (norm < 1e-12) continue;
            z /= norm;
            bool dup = false;
            for (const auto& kept : out)
                if (close_linf(kept, z, 1e-9)) {
                    dup = true;
                    break;
                }
            if (!dup) out.push_back(std::move(z));
        }
    }
    return out;
}

} // namespace okb
