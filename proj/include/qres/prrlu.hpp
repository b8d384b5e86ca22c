#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/LU>

#include "qres/errors.hpp"
#include "qres/linalg.hpp"

namespace qres {

/// Outcome of continuing a cross approximation of one matrix.
struct CrossExtension {
    std::vector<Eigen::Index> new_rows; ///< accepted pivot rows, in order
    std::vector<Eigen::Index> new_cols;
    std::vector<double> pivot_values;   ///< |Schur complement| at each accepted pivot
    double remaining_error = 0.0;       ///< max |A - cross(A)| after the last accepted pivot
};

/// Partial rank-revealing LU with full pivoting, continued from an existing
/// set of pivots.
///
/// The current approximation is the cross A(:,cols) A(rows,cols)^{-1} A(rows,:)
/// (computed through an LU factorization, never an explicit inverse). Pivots are
/// then added greedily at the largest entry of the Schur complement while that
/// entry exceeds `threshold`, stays above `guard` (a conditioning floor) and the
/// rank stays below `max_rank`.
inline CrossExtension extend_cross(const RealMatrix& a, std::span<const Eigen::Index> rows,
                                   std::span<const Eigen::Index> cols, double threshold, double guard,
                                   std::size_t max_rank) {
    if (rows.size() != cols.size())
        throw ShapeError("extend_cross: pivot row and column counts differ");
    const auto r = static_cast<Eigen::Index>(rows.size());

    RealMatrix schur = a;
    if (r > 0) {
        RealMatrix pivot(r, r), left(a.rows(), r), top(r, a.cols());
        for (Eigen::Index k = 0; k < r; ++k) {
            left.col(k) = a.col(cols[k]);
            top.row(k) = a.row(rows[k]);
        }
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < r; ++j)
                pivot(i, j) = a(rows[i], cols[j]);
        Eigen::FullPivLU<RealMatrix> lu(pivot);
        if (!lu.isInvertible() || lu.rcond() < 1e-14)
            throw PivotError("extend_cross: pivot matrix is numerically singular");
        schur.noalias() -= left * lu.solve(top);
        // the cross reproduces its own rows and columns exactly
        for (Eigen::Index k = 0; k < r; ++k) {
            schur.row(rows[k]).setZero();
            schur.col(cols[k]).setZero();
        }
    }

    CrossExtension out;
    std::size_t rank = rows.size();
    while (true) {
        if (schur.size() == 0)
            break;
        Eigen::Index i = 0, j = 0;
        const double pivot = schur.cwiseAbs().maxCoeff(&i, &j);
        out.remaining_error = pivot;
        if (rank >= max_rank || !(pivot > threshold) || !(pivot > guard))
            break;
        out.new_rows.push_back(i);
        out.new_cols.push_back(j);
        out.pivot_values.push_back(pivot);
        const RealVector col = schur.col(j);
        const Eigen::RowVectorXd row = schur.row(i) / schur(i, j);
        schur.noalias() -= col * row;
        schur.row(i).setZero();
        schur.col(j).setZero();
        ++rank;
        out.remaining_error = 0.0;
    }
    return out;
}

} // namespace qres
