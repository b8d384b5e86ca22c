#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qres {

using cplx = std::complex<double>;
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic>;
using RowMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr std::size_t unbounded = static_cast<std::size_t>(-1);

/// Thin SVD with the library-wide truncation rule: singular values with
/// s_k / s_1 < rel_tol are dropped, then at most max_rank are kept.
struct TruncatedSvd {
    Matrix u;         // rows x k
    RealVector s;     // k
    Matrix vh;        // k x cols
    RealVector discarded;
};

inline TruncatedSvd truncated_svd(const Matrix& m, std::size_t max_rank, double rel_tol) {
    Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& sv = svd.singularValues();
    const Eigen::Index n = sv.size();
    Eigen::Index keep = 0;
    const double s1 = n > 0 ? sv(0) : 0.0;
    while (keep < n && sv(keep) > 0.0 && !(s1 > 0.0 && sv(keep) / s1 < rel_tol))
        ++keep;
    keep = std::min<Eigen::Index>(keep, static_cast<Eigen::Index>(std::min<std::size_t>(max_rank, n)));
    keep = std::max<Eigen::Index>(keep, 1);

    TruncatedSvd out;
    out.u = svd.matrixU().leftCols(keep);
    out.s = sv.head(keep);
    out.vh = svd.matrixV().leftCols(keep).adjoint();
    out.discarded = sv.tail(n - keep);
    return out;
}

} // namespace qres
