#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <cstddef>
#include <vector>

#include "qres/lanczos.hpp"
#include "qres/linalg.hpp"
#include "qres/mpo.hpp"
#include "qres/mps.hpp"
#include "qres/spin_model.hpp"

namespace qres {

struct DmrgOptions {
    std::size_t max_bond = 64;
    std::size_t max_sweeps = 40;
    std::size_t min_sweeps = 2;
    double energy_tol = 1e-10;
    double svd_tol = 1e-12;
    LanczosOptions local{1e-12, 400, 30};
};

struct DmrgResult {
    double energy = 0.0;
    MatrixProductState psi;
    std::size_t sweeps = 0;
    bool converged = false;
    double max_discarded = 0.0;
    std::vector<double> sweep_energies;
};

namespace detail {

// Environment of one cut: one (bra x ket) matrix per MPO channel.
using Environment = std::vector<Matrix>;

inline Environment grow_left(const Environment& env, const SiteTensor& a, const OperatorSite& w) {
    const auto chi = static_cast<Eigen::Index>(a.right());
    Environment out(w.right(), Matrix::Zero(chi, chi));
    for (const auto& t : w.terms())
        for (Eigen::Index so = 0; so < 2; ++so)
            for (Eigen::Index si = 0; si < 2; ++si)
                if (t.op(so, si) != cplx{})
                    out[t.right].noalias() += t.op(so, si) * (a.slice(static_cast<std::size_t>(so)).adjoint() *
                                                             (env[t.left] * a.slice(static_cast<std::size_t>(si))));
    return out;
}

inline Environment grow_right(const Environment& env, const SiteTensor& a, const OperatorSite& w) {
    const auto chi = static_cast<Eigen::Index>(a.left());
    Environment out(w.left(), Matrix::Zero(chi, chi));
    for (const auto& t : w.terms())
        for (Eigen::Index so = 0; so < 2; ++so)
            for (Eigen::Index si = 0; si < 2; ++si)
                if (t.op(so, si) != cplx{})
                    out[t.left].noalias() += t.op(so, si) * (a.slice(static_cast<std::size_t>(so)).conjugate() *
                                                            (env[t.right] * a.slice(static_cast<std::size_t>(si)).transpose()));
    return out;
}

// Two-site effective Hamiltonian acting on theta laid out row-major as (a, s1, s2, b).
class TwoSiteOperator {
public:
    TwoSiteOperator(const Environment& left, const OperatorSite& w1, const OperatorSite& w2, const Environment& right)
        : left_(left), right_(right), t1_(w1.terms()), t2_(w2.terms()), chl_(left.front().rows()),
          chr_(right.front().rows()) {}

    Eigen::Index dim() const { return chl_ * 4 * chr_; }

    Vector operator()(const Vector& theta) const {
        using Block = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;
        using MutBlock = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
        const Eigen::OuterStride<> stride(4 * chr_);
        const auto block = [&](int s1, int s2) { return Block(theta.data() + (s1 * 2 + s2) * chr_, chl_, chr_, stride); };

        // X[wl][s1][s2] = L[wl] theta[s1][s2]
        std::vector<std::array<Matrix, 4>> lx(left_.size());
        std::vector<bool> used(left_.size(), false);
        for (const auto& t : t1_)
            used[t.left] = true;
        for (std::size_t w = 0; w < left_.size(); ++w)
            if (used[w])
                for (int s = 0; s < 4; ++s)
                    lx[w][s] = left_[w] * block(s / 2, s % 2);

        // Y[wr][s1'][s2'] = sum W1 W2 X
        std::vector<std::array<Matrix, 4>> y(right_.size());
        std::vector<bool> touched(right_.size(), false);
        for (const auto& a : t1_)
            for (const auto& b : t2_) {
                if (a.right != b.left)
                    continue;
                auto& target = y[b.right];
                if (!touched[b.right]) {
                    for (auto& m : target)
                        m = Matrix::Zero(chl_, chr_);
                    touched[b.right] = true;
                }
                for (int o1 = 0; o1 < 2; ++o1)
                    for (int i1 = 0; i1 < 2; ++i1) {
                        const cplx c1 = a.op(o1, i1);
                        if (c1 == cplx{})
                            continue;
                        for (int o2 = 0; o2 < 2; ++o2)
                            for (int i2 = 0; i2 < 2; ++i2) {
                                const cplx c2 = b.op(o2, i2);
                                if (c2 == cplx{})
                                    continue;
                                target[o1 * 2 + o2] += (c1 * c2) * lx[a.left][i1 * 2 + i2];
                            }
                    }
            }

        Vector out = Vector::Zero(theta.size());
        for (std::size_t w = 0; w < right_.size(); ++w) {
            if (!touched[w])
                continue;
            const Matrix rt = right_[w].transpose();
            for (int s = 0; s < 4; ++s) {
                MutBlock dst(out.data() + s * chr_, chl_, chr_, stride);
                dst.noalias() += y[w][s] * rt;
            }
        }
        return out;
    }

private:
    const Environment& left_;
    const Environment& right_;
    std::vector<OperatorSite::Term> t1_, t2_;
    Eigen::Index chl_, chr_;
};

inline Vector merge_two_sites(const SiteTensor& a, const SiteTensor& b) {
    const Matrix m = Matrix(a.left_unfolding()) * Matrix(b.right_unfolding());
    // (left*2) x (2*right) is already the (a, s1, s2, b) row-major layout
    const RowMatrix rm = m;
    return Eigen::Map<const Vector>(rm.data(), rm.size());
}

} // namespace detail

/// Two-site DMRG for the Ising model using the automaton MPO. Starts from the
/// spin-flip symmetric product state |+...+>; stops when the energy change
/// over a full sweep drops below energy_tol. The returned state is normalized
/// and right-canonical with center 0.
inline DmrgResult dmrg_ground_state(const SpinModel& model, const DmrgOptions& opts = {}) {
    const auto mpo = mpo_from_model(model);
    const std::size_t n = model.n_sites();
    if (n < 2)
        throw InvalidInput("dmrg_ground_state: need at least two sites");

    std::vector<SiteTensor> sites;
    for (std::size_t l = 0; l < n; ++l) {
        SiteTensor t(1, 2, 1);
        t(0, 0, 0) = t(0, 1, 0) = cplx{1.0 / std::sqrt(2.0), 0.0};
        sites.push_back(std::move(t));
    }

    std::vector<detail::Environment> left(n + 1), right(n + 1);
    left[0] = {Matrix::Ones(1, 1)};
    right[n] = {Matrix::Ones(1, 1)};
    for (std::size_t l = n; l-- > 1;)
        right[l] = detail::grow_right(right[l + 1], sites[l], mpo.site(l));

    DmrgResult result;
    double previous = std::numeric_limits<double>::infinity();
    double energy = 0.0;

    const auto optimize = [&](std::size_t l, bool moving_right) {
        const detail::TwoSiteOperator heff(left[l], mpo.site(l), mpo.site(l + 1), right[l + 2]);
        Vector theta = detail::merge_two_sites(sites[l], sites[l + 1]);
        auto eig = lanczos_lowest(heff, theta, opts.local);
        energy = eig.eigenvalue;
        const Eigen::Index rows = static_cast<Eigen::Index>(sites[l].left() * 2);
        const Eigen::Index cols = static_cast<Eigen::Index>(2 * sites[l + 1].right());
        const Matrix m = Eigen::Map<const RowMatrix>(eig.vector.data(), rows, cols);
        auto svd = truncated_svd(m, opts.max_bond, opts.svd_tol);
        if (svd.discarded.size() > 0)
            result.max_discarded = std::max(result.max_discarded, svd.discarded.squaredNorm());
        svd.s /= svd.s.norm();
        if (moving_right) {
            sites[l] = SiteTensor::from_left_unfolding(svd.u, 2);
            sites[l + 1] = SiteTensor::from_right_unfolding(svd.s.asDiagonal() * svd.vh, 2);
            left[l + 1] = detail::grow_left(left[l], sites[l], mpo.site(l));
        } else {
            sites[l] = SiteTensor::from_left_unfolding(svd.u * svd.s.asDiagonal(), 2);
            sites[l + 1] = SiteTensor::from_right_unfolding(svd.vh, 2);
            right[l + 1] = detail::grow_right(right[l + 2], sites[l + 1], mpo.site(l + 1));
        }
    };

    for (std::size_t sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        result.max_discarded = 0.0;
        for (std::size_t l = 0; l + 1 < n; ++l)
            optimize(l, true);
        for (std::size_t l = n - 1; l-- > 0;)
            optimize(l, false);
        result.sweeps = sweep + 1;
        result.sweep_energies.push_back(energy);
        if (result.sweeps >= opts.min_sweeps && std::abs(energy - previous) < opts.energy_tol) {
            result.converged = true;
            break;
        }
        previous = energy;
    }
    result.energy = energy;
    result.psi = MatrixProductState(std::move(sites), 0);
    return result;
}

} // namespace qres
