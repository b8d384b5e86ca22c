#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qres/linalg.hpp"

namespace qres {

struct LanczosOptions {
    double tol = 1e-10;          ///< stop when ||Hv - Ev|| <= tol * |E|
    std::size_t max_iter = 500;  ///< total matrix-vector products
    std::size_t krylov_dim = 40; ///< basis size before a restart
};

struct LanczosResult {
    double eigenvalue = 0.0;
    Vector vector;
    double residual = std::numeric_limits<double>::infinity();
    std::size_t iterations = 0;
    bool converged = false;
};

/// Lowest eigenpair of a Hermitian operator. Lanczos with full (twice applied)
/// reorthogonalization, restarted from the current Ritz vector whenever the
/// Krylov basis reaches krylov_dim.
template <class MatVec>
LanczosResult lanczos_lowest(MatVec&& apply, Vector start, const LanczosOptions& opts = {}) {
    const Eigen::Index n = start.size();
    LanczosResult best;
    double start_norm = start.norm();
    if (!(start_norm > 0.0)) {
        start = Vector::Ones(n);
        start_norm = start.norm();
    }
    Vector x = start / start_norm;

    const auto target = [&](double e) { return opts.tol * std::max(std::abs(e), 1e-300); };
    const Eigen::Index m_max = std::max<Eigen::Index>(
        2, std::min<Eigen::Index>(n, static_cast<Eigen::Index>(opts.krylov_dim)));

    while (best.iterations < opts.max_iter) {
        std::vector<Vector> basis{x};
        std::vector<double> alpha, beta;
        Vector w;
        double theta = 0.0;
        RealVector y;
        bool invariant = false;

        for (Eigen::Index j = 0; j < m_max && best.iterations < opts.max_iter; ++j) {
            w = apply(basis[j]);
            ++best.iterations;
            alpha.push_back(basis[j].dot(w).real());
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& v : basis)
                    w -= v * v.dot(w);
            const double b = w.norm();

            const auto k = static_cast<Eigen::Index>(alpha.size());
            RealMatrix t = RealMatrix::Zero(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                t(i, i) = alpha[i];
                if (i + 1 < k)
                    t(i, i + 1) = t(i + 1, i) = beta[i];
            }
            Eigen::SelfAdjointEigenSolver<RealMatrix> es(t);
            theta = es.eigenvalues()(0);
            y = es.eigenvectors().col(0);

            const double estimate = b * std::abs(y(k - 1));
            if (b <= 1e-14 * std::max(1.0, std::abs(theta)) || k == n) {
                invariant = true;
                break;
            }
            if (estimate <= 0.1 * target(theta))
                break;
            beta.push_back(b);
            basis.push_back(w / b);
        }

        Vector ritz = Vector::Zero(n);
        for (Eigen::Index i = 0; i < y.size(); ++i)
            ritz += y(i) * basis[static_cast<std::size_t>(i)];
        ritz.normalize();
        const Vector hx = apply(ritz);
        ++best.iterations;
        const double e = ritz.dot(hx).real();
        const double res = (hx - e * ritz).norm();
        if (res < best.residual) {
            best.residual = res;
            best.eigenvalue = e;
            best.vector = ritz;
        }
        if (res <= target(e) || (invariant && res <= 1e-12 * std::max(1.0, std::abs(e)))) {
            best.converged = true;
            break;
        }
        x = ritz;
    }
    return best;
}

} // namespace qres
