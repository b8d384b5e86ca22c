#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <vector>

#include "qres/errors.hpp"
#include "qres/linalg.hpp"
#include "qres/pauli.hpp"
#include "qres/spin_model.hpp"

namespace qres {

/// Degree-4 MPO site (left bond, phys out, phys in, right bond), row-major.
class OperatorSite {
public:
    /// Nonzero local-operator block between a left and a right channel.
    struct Term {
        std::size_t left;
        std::size_t right;
        Eigen::Matrix2cd op;
    };

    OperatorSite(std::size_t left, std::size_t phys, std::size_t right)
        : left_(left), phys_(phys), right_(right), data_(left * phys * phys * right, cplx{}) {}

    std::size_t left() const noexcept { return left_; }
    std::size_t phys() const noexcept { return phys_; }
    std::size_t right() const noexcept { return right_; }

    cplx& operator()(std::size_t wl, std::size_t out, std::size_t in, std::size_t wr) {
        return data_[((wl * phys_ + out) * phys_ + in) * right_ + wr];
    }
    const cplx& operator()(std::size_t wl, std::size_t out, std::size_t in, std::size_t wr) const {
        return data_[((wl * phys_ + out) * phys_ + in) * right_ + wr];
    }

    void add_block(std::size_t wl, std::size_t wr, const Eigen::Matrix2cd& op) {
        for (std::size_t o = 0; o < 2; ++o)
            for (std::size_t i = 0; i < 2; ++i)
                (*this)(wl, o, i, wr) += op(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
    }

    std::vector<Term> terms() const {
        std::vector<Term> out;
        for (std::size_t wl = 0; wl < left_; ++wl)
            for (std::size_t wr = 0; wr < right_; ++wr) {
                Eigen::Matrix2cd op;
                bool nonzero = false;
                for (std::size_t o = 0; o < 2; ++o)
                    for (std::size_t i = 0; i < 2; ++i) {
                        op(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i)) = (*this)(wl, o, i, wr);
                        nonzero = nonzero || (*this)(wl, o, i, wr) != cplx{};
                    }
                if (nonzero)
                    out.push_back({wl, wr, op});
            }
        return out;
    }

private:
    std::size_t left_, phys_, right_;
    std::vector<cplx> data_;
};

class MatrixProductOperator {
public:
    explicit MatrixProductOperator(std::vector<OperatorSite> sites) : sites_(std::move(sites)) {
        if (sites_.empty() || sites_.front().left() != 1 || sites_.back().right() != 1)
            throw ShapeError("MatrixProductOperator: boundary bonds must be 1");
        for (std::size_t l = 0; l + 1 < sites_.size(); ++l)
            if (sites_[l].right() != sites_[l + 1].left())
                throw ShapeError("MatrixProductOperator: inconsistent bond dimensions");
    }

    std::size_t size() const noexcept { return sites_.size(); }
    const OperatorSite& site(std::size_t l) const { return sites_.at(l); }

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
    std::vector<OperatorSite> sites_;
};

/// Finite-state-automaton MPO of the Ising Hamiltonian in site order (snake
/// order for grids). The channels crossing the cut left of site c are
///   start | one "Z_i pending" channel per source i < c with a partner j >= c | done
/// (cut 0 carries only start, cut L only done), so wrap-around and snake-induced
/// long-range bonds share a channel per source site.
inline MatrixProductOperator mpo_from_model(const SpinModel& model) {
    const std::size_t n = model.n_sites();
    std::map<std::size_t, std::vector<std::size_t>> partners; // i -> sorted j > i
    for (const auto& [i, j] : model.bonds())
        partners[i].push_back(j);
    for (auto& [i, js] : partners)
        std::sort(js.begin(), js.end());

    struct Channels {
        bool start = false, done = false;
        std::vector<std::size_t> sources;
        std::size_t size() const { return (start ? 1 : 0) + sources.size() + (done ? 1 : 0); }
        std::size_t start_at() const { return 0; }
        std::size_t source_at(std::size_t i) const {
            const auto it = std::find(sources.begin(), sources.end(), i);
            return it == sources.end() ? static_cast<std::size_t>(-1)
                                       : (start ? 1 : 0) + static_cast<std::size_t>(it - sources.begin());
        }
        std::size_t done_at() const { return size() - 1; }
    };
    std::vector<Channels> cuts(n + 1);
    for (std::size_t c = 0; c <= n; ++c) {
        cuts[c].start = c < n;
        cuts[c].done = c > 0;
        if (c > 0 && c < n)
            for (const auto& [i, js] : partners)
                if (i < c && js.back() >= c)
                    cuts[c].sources.push_back(i);
    }

    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd x = pauli_matrix(Pauli::X);
    const Eigen::Matrix2cd z = pauli_matrix(Pauli::Z);
    const double coupling = model.coupling();
    const double h = model.field();

    std::vector<OperatorSite> sites;
    for (std::size_t l = 0; l < n; ++l) {
        const auto& lc = cuts[l];
        const auto& rc = cuts[l + 1];
        OperatorSite w(lc.size(), 2, rc.size());
        if (lc.start && rc.start)
            w.add_block(lc.start_at(), rc.start_at(), id);
        if (lc.start && rc.done)
            w.add_block(lc.start_at(), rc.done_at(), -h * x);
        if (lc.start && rc.source_at(l) != static_cast<std::size_t>(-1))
            w.add_block(lc.start_at(), rc.source_at(l), z);
        for (auto i : lc.sources) {
            const auto& js = partners[i];
            if (std::binary_search(js.begin(), js.end(), l) && rc.done)
                w.add_block(lc.source_at(i), rc.done_at(), -coupling * z);
            if (rc.source_at(i) != static_cast<std::size_t>(-1))
                w.add_block(lc.source_at(i), rc.source_at(i), id);
        }
        if (lc.done && rc.done)
            w.add_block(lc.done_at(), rc.done_at(), id);
        sites.push_back(std::move(w));
    }
    return MatrixProductOperator(std::move(sites));
}

/// Dense 2^N x 2^N matrix of an MPO (row-major basis ordering); for tests and
/// small systems only.
inline Matrix mpo_to_matrix(const MatrixProductOperator& mpo) {
    if (mpo.size() > 12)
        throw ResourceLimit("mpo_to_matrix: too many sites for a dense matrix");
    std::vector<Matrix> acc{Matrix::Ones(1, 1)};
    for (std::size_t l = 0; l < mpo.size(); ++l) {
        const auto& w = mpo.site(l);
        const auto dim = acc.front().rows();
        std::vector<Matrix> next(w.right(), Matrix::Zero(dim * 2, dim * 2));
        for (const auto& t : w.terms())
            for (Eigen::Index o = 0; o < 2; ++o)
                for (Eigen::Index i = 0; i < 2; ++i)
                    if (t.op(o, i) != cplx{})
                        for (Eigen::Index r = 0; r < dim; ++r)
                            for (Eigen::Index c = 0; c < dim; ++c)
                                next[t.right](2 * r + o, 2 * c + i) += acc[t.left](r, c) * t.op(o, i);
        acc = std::move(next);
    }
    return acc.front();
}

} // namespace qres
