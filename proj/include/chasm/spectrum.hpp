#ifndef CHASM_SPECTRUM_HPP
#define CHASM_SPECTRUM_HPP

/** @file
 * Truncated spectra of the operator estimate and their frame-to-frame
 * alignment.
 *
 * Consecutive spectra are matched by the permutation minimising the total
 * squared displacement sum_i |prev_i - next_pi(i)|^2.  That permutation is
 * the optimal coupling between the two uniform empirical spectral measures
 * (so the minimum divided by r is W_2^2) and equivalently maximises
 * tr(Pi Re(conj(next) prev^T)).  The assignment is solved with a
 * Jonker-Volgenant style shortest-augmenting-path method in O(r^3).
 */

#include <chasm/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

namespace chasm {

using cplx = std::complex<double>;

/// Bijection on {0, ..., r-1}; mapping[i] is the column assigned to row i.
struct Permutation {
    std::vector<int> mapping;

    [[nodiscard]] bool valid() const {
        std::vector<char> seen(mapping.size(), 0);
        for (int j : mapping) {
            if (j < 0 || static_cast<std::size_t>(j) >= mapping.size() || seen[j]) return false;
            seen[j] = 1;
        }
        return true;
    }
    friend bool operator==(const Permutation&, const Permutation&) = default;
};

struct AlignedSpectrum {
    Eigen::VectorXcd values;
    [[nodiscard]] Eigen::Index rank() const { return values.size(); }
};

/// Descending modulus, then descending real part, then descending imaginary part.
inline bool spectral_order(const cplx& a, const cplx& b) {
    const double ma = std::abs(a), mb = std::abs(b);
    if (ma != mb) return ma > mb;
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

inline Eigen::VectorXcd dominant_eigenvalues(const Eigen::Ref<const Eigen::MatrixXd>& theta,
                                             Eigen::Index rank) {
    detail::require(theta.rows() == theta.cols(), "dominant_eigenvalues: matrix must be square");
    detail::require(rank >= 1 && rank <= theta.rows(), "dominant_eigenvalues: rank must lie in [1, d]");
    if (!theta.allFinite()) throw NumericalError("dominant_eigenvalues: non-finite matrix");

    Eigen::EigenSolver<Eigen::MatrixXd> solver(theta, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw NumericalError("dominant_eigenvalues: eigensolver failed");
    const Eigen::VectorXcd& all = solver.eigenvalues();
    if (!all.allFinite()) throw NumericalError("dominant_eigenvalues: non-finite eigenvalues");

    std::vector<cplx> sorted(all.data(), all.data() + all.size());
    std::sort(sorted.begin(), sorted.end(), spectral_order);
    Eigen::VectorXcd out(rank);
    for (Eigen::Index i = 0; i < rank; ++i) out[i] = sorted[static_cast<std::size_t>(i)];
    return out;
}

/// cost(i, j) = |prev_i - next_j|^2.
inline Eigen::MatrixXd alignment_cost(const Eigen::Ref<const Eigen::VectorXcd>& prev,
                                      const Eigen::Ref<const Eigen::VectorXcd>& next) {
    detail::require(prev.size() == next.size(), "alignment_cost: length mismatch");
    const Eigen::Index r = prev.size();
    Eigen::MatrixXd cost(r, r);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < r; ++j) cost(i, j) = std::norm(prev[i] - next[j]);
    return cost;
}

namespace detail {

struct AssignmentResult {
    std::vector<int> row_to_col;
    std::vector<double> u, v; // optimal dual potentials
};

// Shortest augmenting path with potentials (Jonker & Volgenant 1987,
// without the column-reduction warm start).  Rows are inserted one at a
// time; each insertion runs a Dijkstra over reduced costs.
inline AssignmentResult shortest_augmenting_path(const Eigen::Ref<const Eigen::MatrixXd>& c) {
    const int n = static_cast<int>(c.rows());
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based internally; column 0 is the virtual source.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> col_owner(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        col_owner[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = col_owner[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (col_owner[j0] != 0);
        do {
            const int j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    AssignmentResult res;
    res.row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j) res.row_to_col[col_owner[j] - 1] = j - 1;
    res.u.assign(u.begin() + 1, u.end());
    res.v.assign(v.begin() + 1, v.end());
    return res;
}

inline double assignment_objective(const Eigen::Ref<const Eigen::MatrixXd>& c, const std::vector<int>& m) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) total += c(static_cast<Eigen::Index>(i), m[i]);
    return total;
}

} // namespace detail

/// Minimum-cost perfect assignment.  Among optimal assignments the
/// lexicographically smallest mapping is returned.
inline Permutation solve_assignment(const Eigen::Ref<const Eigen::MatrixXd>& cost) {
    detail::require(cost.rows() == cost.cols(), "solve_assignment: cost must be square");
    if (!cost.allFinite()) throw InvalidArgument("solve_assignment: non-finite cost");
    const int n = static_cast<int>(cost.rows());
    if (n == 0) return {};

    auto base = detail::shortest_augmenting_path(cost);
    const double optimum = detail::assignment_objective(cost, base.row_to_col);
    const double tol = 1e-12 * (1.0 + std::abs(optimum) + cost.cwiseAbs().maxCoeff());

    // Lexicographic refinement.  Only edges that are tight under the optimal
    // duals can belong to an optimal assignment, so in the generic case (a
    // unique optimum) no sub-problem is ever solved.
    std::vector<int> chosen(n, -1);
    std::vector<char> col_taken(n, 0);
    double prefix = 0.0;
    for (int i = 0; i < n; ++i) {
        const int fallback = base.row_to_col[i];
        int pick = -1;
        for (int j = 0; j < n && pick < 0; ++j) {
            if (col_taken[j]) continue;
            if (j == fallback) {
                pick = j;
                break;
            }
            if (cost(i, j) - base.u[i] - base.v[j] > tol) continue;
            // Does some optimal completion use (i, j)?
            const int m = n - i - 1;
            double rest = 0.0;
            std::vector<int> sub_cols, sub_map;
            if (m > 0) {
                sub_cols.reserve(m);
                for (int k = 0; k < n; ++k)
                    if (!col_taken[k] && k != j) sub_cols.push_back(k);
                Eigen::MatrixXd sub(m, m);
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b) sub(a, b) = cost(i + 1 + a, sub_cols[b]);
                sub_map = detail::shortest_augmenting_path(sub).row_to_col;
                rest = detail::assignment_objective(sub, sub_map);
            }
            if (prefix + cost(i, j) + rest <= optimum + tol) {
                pick = j;
                // The remaining rows follow this completion from here on.
                // The original duals stay valid for the tightness screen
                // since every optimum is tight under any optimal dual.
                for (int a = 0; a < m; ++a) base.row_to_col[i + 1 + a] = sub_cols[sub_map[a]];
            }
        }
        if (pick < 0) pick = fallback;
        chosen[i] = pick;
        col_taken[pick] = 1;
        prefix += cost(i, pick);
    }
    return Permutation{std::move(chosen)};
}

/// Reorders raw_next so entry i is the eigenvalue assigned to prev entry i.
inline AlignedSpectrum align(const AlignedSpectrum& prev, const Eigen::Ref<const Eigen::VectorXcd>& raw_next) {
    detail::require(prev.rank() == raw_next.size(), "align: rank mismatch");
    const Permutation pi = solve_assignment(alignment_cost(prev.values, raw_next));
    AlignedSpectrum out;
    out.values.resize(raw_next.size());
    for (Eigen::Index i = 0; i < raw_next.size(); ++i) out.values[i] = raw_next[pi.mapping[i]];
    return out;
}

/// Total squared displacement between two equally-ordered spectra.
inline double squared_displacement(const Eigen::Ref<const Eigen::VectorXcd>& a,
                                   const Eigen::Ref<const Eigen::VectorXcd>& b) {
    detail::require(a.size() == b.size(), "squared_displacement: length mismatch");
    return (a - b).squaredNorm();
}

} // namespace chasm

#endif
