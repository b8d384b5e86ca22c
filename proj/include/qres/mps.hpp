#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "qres/dense_tensor.hpp"
#include "qres/errors.hpp"
#include "qres/linalg.hpp"
#include "qres/pauli.hpp"

namespace qres {

/// Degree-3 site tensor with legs (left bond, physical, right bond), stored
/// row-major so that both unfoldings are plain views of the same buffer:
///   left unfolding   (left*phys) x right,  row = a*phys + s
///   right unfolding  left x (phys*right),  col = s*right + b
class SiteTensor {
public:
    using SliceMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

    SiteTensor() = default;
    SiteTensor(std::size_t left, std::size_t phys, std::size_t right)
        : left_(left), phys_(phys), right_(right), data_(left * phys * right, cplx{}) {
        if (left == 0 || phys == 0 || right == 0)
            throw ShapeError("SiteTensor: zero-sized leg");
    }
    SiteTensor(std::size_t left, std::size_t phys, std::size_t right, std::vector<cplx> data)
        : left_(left), phys_(phys), right_(right), data_(std::move(data)) {
        if (left == 0 || phys == 0 || right == 0 || data_.size() != left * phys * right)
            throw ShapeError("SiteTensor: shape does not match data length");
    }

    static SiteTensor from_left_unfolding(const Matrix& m, std::size_t phys) {
        if (m.rows() % static_cast<Eigen::Index>(phys) != 0)
            throw ShapeError("SiteTensor: left unfolding rows not divisible by phys");
        SiteTensor t(m.rows() / phys, phys, m.cols());
        t.left_unfolding() = m;
        return t;
    }

    static SiteTensor from_right_unfolding(const Matrix& m, std::size_t phys) {
        if (m.cols() % static_cast<Eigen::Index>(phys) != 0)
            throw ShapeError("SiteTensor: right unfolding cols not divisible by phys");
        SiteTensor t(m.rows(), phys, m.cols() / phys);
        t.right_unfolding() = m;
        return t;
    }

    /// Builds a site from its physical slices (each left x right).
    static SiteTensor from_slices(std::span<const Matrix> slices) {
        if (slices.empty())
            throw ShapeError("SiteTensor: no slices");
        SiteTensor t(slices[0].rows(), slices.size(), slices[0].cols());
        for (std::size_t s = 0; s < slices.size(); ++s) {
            if (slices[s].rows() != slices[0].rows() || slices[s].cols() != slices[0].cols())
                throw ShapeError("SiteTensor: slices of unequal shape");
            for (std::size_t a = 0; a < t.left_; ++a)
                for (std::size_t b = 0; b < t.right_; ++b)
                    t(a, s, b) = slices[s](a, b);
        }
        return t;
    }

    std::size_t left() const noexcept { return left_; }
    std::size_t phys() const noexcept { return phys_; }
    std::size_t right() const noexcept { return right_; }

    cplx& operator()(std::size_t a, std::size_t s, std::size_t b) { return data_[(a * phys_ + s) * right_ + b]; }
    const cplx& operator()(std::size_t a, std::size_t s, std::size_t b) const {
        return data_[(a * phys_ + s) * right_ + b];
    }

    std::span<const cplx> data() const noexcept { return data_; }

    SliceMap slice(std::size_t s) const {
        return SliceMap(data_.data() + s * right_, static_cast<Eigen::Index>(left_),
                        static_cast<Eigen::Index>(right_),
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(phys_ * right_)));
    }

    Eigen::Map<RowMatrix> left_unfolding() {
        return {data_.data(), static_cast<Eigen::Index>(left_ * phys_), static_cast<Eigen::Index>(right_)};
    }
    Eigen::Map<const RowMatrix> left_unfolding() const {
        return {data_.data(), static_cast<Eigen::Index>(left_ * phys_), static_cast<Eigen::Index>(right_)};
    }
    Eigen::Map<RowMatrix> right_unfolding() {
        return {data_.data(), static_cast<Eigen::Index>(left_), static_cast<Eigen::Index>(phys_ * right_)};
    }
    Eigen::Map<const RowMatrix> right_unfolding() const {
        return {data_.data(), static_cast<Eigen::Index>(left_), static_cast<Eigen::Index>(phys_ * right_)};
    }

private:
    std::size_t left_ = 0, phys_ = 0, right_ = 0;
    std::vector<cplx> data_;
};

/// Max deviation of sum_s A[s]^dag A[s] from the identity.
inline double left_isometry_deviation(const SiteTensor& t) {
    const Matrix m = t.left_unfolding();
    return (m.adjoint() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

/// Max deviation of sum_s A[s] A[s]^dag from the identity.
inline double right_isometry_deviation(const SiteTensor& t) {
    const Matrix m = t.right_unfolding();
    return (m * m.adjoint() - Matrix::Identity(m.rows(), m.rows())).cwiseAbs().maxCoeff();
}

/// Finite matrix product state with open boundaries (bond_0 = bond_L = 1) and
/// a uniform physical dimension. Sites are ordered left to right.
class MatrixProductState {
public:
    MatrixProductState() = default;

    explicit MatrixProductState(std::vector<SiteTensor> sites, std::optional<std::size_t> center = std::nullopt)
        : sites_(std::move(sites)), center_(center) {
        if (sites_.empty())
            throw ShapeError("MatrixProductState: no sites");
        if (sites_.front().left() != 1 || sites_.back().right() != 1)
            throw ShapeError("MatrixProductState: boundary bonds must be 1");
        const auto d = sites_.front().phys();
        for (std::size_t l = 0; l < sites_.size(); ++l) {
            if (sites_[l].phys() != d)
                throw ShapeError("MatrixProductState: non-uniform physical dimension");
            if (l + 1 < sites_.size() && sites_[l].right() != sites_[l + 1].left())
                throw ShapeError("MatrixProductState: inconsistent bond dimensions");
        }
        if (center_ && *center_ >= sites_.size())
            throw ShapeError("MatrixProductState: canonical center out of range");
    }

    std::size_t size() const noexcept { return sites_.size(); }
    std::size_t phys_dim() const noexcept { return sites_.empty() ? 0 : sites_.front().phys(); }
    const SiteTensor& site(std::size_t l) const { return sites_.at(l); }
    const std::vector<SiteTensor>& sites() const noexcept { return sites_; }
    std::optional<std::size_t> canonical_center() const noexcept { return center_; }

    /// Bond dimensions bond_0 .. bond_L.
    std::vector<std::size_t> bond_dims() const {
        std::vector<std::size_t> dims{1};
        for (const auto& s : sites_)
            dims.push_back(s.right());
        return dims;
    }

    std::size_t max_bond() const {
        std::size_t m = 1;
        for (const auto& s : sites_)
            m = std::max(m, s.right());
        return m;
    }

private:
    std::vector<SiteTensor> sites_;
    std::optional<std::size_t> center_;
};

namespace detail {

inline void check_config(const MatrixProductState& psi, std::span<const int> config) {
    if (config.size() != psi.size())
        throw ShapeError("configuration length does not match the number of sites");
    for (int s : config)
        if (s < 0 || static_cast<std::size_t>(s) >= psi.phys_dim())
            throw ShapeError("configuration index out of range");
}

// Orthonormalizes site l into a left isometry and pushes the remainder into l+1.
inline void shift_center_right(std::vector<SiteTensor>& sites, std::size_t l) {
    const std::size_t d = sites[l].phys();
    const Matrix m = sites[l].left_unfolding();
    Eigen::HouseholderQR<Matrix> qr(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    const Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    sites[l] = SiteTensor::from_left_unfolding(q, d);
    const Matrix next = r * Matrix(sites[l + 1].right_unfolding());
    sites[l + 1] = SiteTensor::from_right_unfolding(next, sites[l + 1].phys());
}

// Orthonormalizes site l into a right isometry and pushes the remainder into l-1.
inline void shift_center_left(std::vector<SiteTensor>& sites, std::size_t l) {
    const std::size_t d = sites[l].phys();
    const Matrix m = sites[l].right_unfolding();
    const Matrix mh = m.adjoint();
    Eigen::HouseholderQR<Matrix> qr(mh);
    const Eigen::Index k = std::min(mh.rows(), mh.cols());
    const Matrix q = qr.householderQ() * Matrix::Identity(mh.rows(), k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    sites[l] = SiteTensor::from_right_unfolding(q.adjoint(), d);
    const Matrix prev = Matrix(sites[l - 1].left_unfolding()) * r.adjoint();
    sites[l - 1] = SiteTensor::from_left_unfolding(prev, sites[l - 1].phys());
}

} // namespace detail

/// Sequential SVD factorization of a dense state with legs (d, ..., d).
/// The result is left-canonical with its center on the last site.
inline MatrixProductState mps_from_dense(const DenseTensor& vec, std::size_t max_bond = unbounded,
                                         double svd_tol = 0.0) {
    const auto& shape = vec.shape();
    if (shape.empty())
        throw ShapeError("mps_from_dense: tensor has no legs");
    const std::size_t d = shape.front();
    for (auto n : shape)
        if (n != d)
            throw ShapeError("mps_from_dense: physical legs of unequal dimension");
    if (!(vec.norm() > 0.0))
        throw InvalidInput("mps_from_dense: zero-norm input");
    if (max_bond == 0)
        throw InvalidInput("mps_from_dense: max_bond must be positive");

    const std::size_t n_sites = shape.size();
    std::vector<SiteTensor> sites;
    sites.reserve(n_sites);

    // remainder as a (bond*d) x rest matrix, row-major over the dense data
    std::size_t rest = vec.size() / d;
    Matrix rem = Eigen::Map<const RowMatrix>(vec.data().data(), static_cast<Eigen::Index>(d),
                                             static_cast<Eigen::Index>(rest));
    for (std::size_t l = 0; l + 1 < n_sites; ++l) {
        auto svd = truncated_svd(rem, max_bond, svd_tol);
        const auto k = static_cast<std::size_t>(svd.s.size());
        sites.push_back(SiteTensor::from_left_unfolding(svd.u, d));
        const RowMatrix sv = svd.s.asDiagonal() * svd.vh;
        rest /= d;
        // sv is k x (d*rest) row-major; reading it as (k*d) x rest is the next unfolding
        rem = Eigen::Map<const RowMatrix>(sv.data(), static_cast<Eigen::Index>(k * d),
                                          static_cast<Eigen::Index>(rest));
    }
    sites.push_back(SiteTensor::from_left_unfolding(rem, d));
    return MatrixProductState(std::move(sites), n_sites - 1);
}

/// Contracts the full state vector (row-major over the physical legs).
inline DenseTensor to_dense(const MatrixProductState& psi) {
    const std::size_t d = psi.phys_dim();
    RowMatrix acc = RowMatrix::Ones(1, 1);
    for (const auto& site : psi.sites()) {
        RowMatrix next(acc.rows() * static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(site.right()));
        for (Eigen::Index r = 0; r < acc.rows(); ++r)
            for (std::size_t s = 0; s < d; ++s)
                next.row(r * static_cast<Eigen::Index>(d) + static_cast<Eigen::Index>(s)) = acc.row(r) * site.slice(s);
        acc = std::move(next);
    }
    std::vector<cplx> data(acc.data(), acc.data() + acc.size());
    return DenseTensor::state(psi.size(), d, std::move(data));
}

/// <config|psi>, one vector-matrix product per site: O(L chi^2).
inline cplx amplitude(const MatrixProductState& psi, std::span<const int> config) {
    detail::check_config(psi, config);
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    for (std::size_t l = 0; l < psi.size(); ++l)
        v = v * psi.site(l).slice(static_cast<std::size_t>(config[l]));
    return v(0);
}

/// One transfer-matrix step of <psi|P|psi> from the left:
/// E' = sum_s A[s]^dag E (P A)[s]; E is indexed (bra, ket).
inline Matrix pauli_transfer_left(const SiteTensor& site, Pauli p, const Matrix& env) {
    const auto act = pauli_action(p);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(site.right()), static_cast<Eigen::Index>(site.right()));
    for (int s = 0; s < 2; ++s) {
        const Matrix ket = act.coeff[s] * (env * site.slice(static_cast<std::size_t>(s ^ act.flip)));
        out.noalias() += site.slice(static_cast<std::size_t>(s)).adjoint() * ket;
    }
    return out;
}

/// Same step from the right: G' = sum_s c_s conj(A[s]) G A[s^flip]^T.
inline Matrix pauli_transfer_right(const SiteTensor& site, Pauli p, const Matrix& env) {
    const auto act = pauli_action(p);
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(site.left()), static_cast<Eigen::Index>(site.left()));
    for (int s = 0; s < 2; ++s) {
        const Matrix tmp = site.slice(static_cast<std::size_t>(s)).conjugate() * env;
        out.noalias() += act.coeff[s] * (tmp * site.slice(static_cast<std::size_t>(s ^ act.flip)).transpose());
    }
    return out;
}

/// <psi|psi> contracted with the identity transfer matrix.
inline cplx inner(const MatrixProductState& bra, const MatrixProductState& ket) {
    if (bra.size() != ket.size() || bra.phys_dim() != ket.phys_dim())
        throw ShapeError("inner: states of different shape");
    Matrix env = Matrix::Ones(1, 1);
    for (std::size_t l = 0; l < bra.size(); ++l) {
        const auto& a = bra.site(l);
        const auto& b = ket.site(l);
        Matrix next = Matrix::Zero(static_cast<Eigen::Index>(a.right()), static_cast<Eigen::Index>(b.right()));
        for (std::size_t s = 0; s < a.phys(); ++s)
            next.noalias() += a.slice(s).adjoint() * (env * b.slice(s));
        env = std::move(next);
    }
    return env(0, 0);
}

inline double norm(const MatrixProductState& psi) { return std::sqrt(std::max(0.0, inner(psi, psi).real())); }

/// <psi|P|psi> for a normalized qubit state via a single transfer sweep, O(L chi^3).
inline double pauli_expectation(const MatrixProductState& psi, const PauliString& p) {
    if (psi.phys_dim() != 2)
        throw ShapeError("pauli_expectation: physical dimension must be 2");
    if (p.size() != psi.size())
        throw ShapeError("pauli_expectation: Pauli string length does not match the state");
    if (std::abs(norm(psi) - 1.0) > 1e-10)
        throw InvalidInput("pauli_expectation: state is not normalized");
    Matrix env = Matrix::Ones(1, 1);
    for (std::size_t l = 0; l < psi.size(); ++l)
        env = pauli_transfer_left(psi.site(l), p[l], env);
    const cplx value = env(0, 0);
    if (std::abs(value.imag()) > 1e-10)
        throw Error("pauli_expectation: Hermitian contraction produced an imaginary part");
    return value.real();
}

/// Sum over all index configurations: product of the per-site slice sums, O(L d xi^2).
inline cplx sum_all(const MatrixProductState& f) {
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    for (const auto& site : f.sites()) {
        Matrix summed = Matrix::Zero(static_cast<Eigen::Index>(site.left()), static_cast<Eigen::Index>(site.right()));
        for (std::size_t s = 0; s < site.phys(); ++s)
            summed += site.slice(s);
        v = v * summed;
    }
    return v(0);
}

/// Mixed-canonical form: sites left of `center` are left isometries, sites right
/// of it right isometries.
inline MatrixProductState canonicalize(const MatrixProductState& psi, std::size_t center) {
    if (center >= psi.size())
        throw ShapeError("canonicalize: center out of range");
    auto sites = psi.sites();
    for (std::size_t l = 0; l < center; ++l)
        detail::shift_center_right(sites, l);
    for (std::size_t l = sites.size() - 1; l > center; --l)
        detail::shift_center_left(sites, l);
    return MatrixProductState(std::move(sites), center);
}

/// SVD truncation sweep; result is right-canonical with center 0. Each cut keeps
/// singular values with s_k/s_1 >= tol, at most max_bond of them.
inline MatrixProductState compress(const MatrixProductState& psi, std::size_t max_bond, double tol = 0.0) {
    if (max_bond == 0)
        throw InvalidInput("compress: max_bond must be positive");
    auto sites = canonicalize(psi, psi.size() - 1).sites();
    for (std::size_t l = sites.size() - 1; l > 0; --l) {
        const std::size_t d = sites[l].phys();
        auto svd = truncated_svd(Matrix(sites[l].right_unfolding()), max_bond, tol);
        sites[l] = SiteTensor::from_right_unfolding(svd.vh, d);
        const Matrix us = svd.u * svd.s.asDiagonal();
        sites[l - 1] = SiteTensor::from_left_unfolding(Matrix(sites[l - 1].left_unfolding()) * us, d);
    }
    return MatrixProductState(std::move(sites), 0);
}

/// Returns psi / ||psi||, keeping the canonical center.
inline MatrixProductState normalized(const MatrixProductState& psi) {
    const double n = norm(psi);
    if (!(n > 0.0))
        throw InvalidInput("normalized: zero-norm state");
    auto sites = psi.sites();
    const std::size_t at = psi.canonical_center().value_or(0);
    const auto& s = sites[at];
    std::vector<cplx> data(s.data().begin(), s.data().end());
    for (auto& z : data)
        z /= n;
    sites[at] = SiteTensor(s.left(), s.phys(), s.right(), std::move(data));
    return MatrixProductState(std::move(sites), psi.canonical_center());
}

/// Product state from one local vector per site.
inline MatrixProductState product_state(std::span<const Vector> locals) {
    std::vector<SiteTensor> sites;
    for (const auto& v : locals) {
        SiteTensor t(1, static_cast<std::size_t>(v.size()), 1);
        for (Eigen::Index s = 0; s < v.size(); ++s)
            t(0, static_cast<std::size_t>(s), 0) = v(s);
        sites.push_back(std::move(t));
    }
    return MatrixProductState(std::move(sites));
}

} // namespace qres
