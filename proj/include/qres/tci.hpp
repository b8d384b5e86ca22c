#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qres/errors.hpp"
#include "qres/linalg.hpp"
#include "qres/mps.hpp"
#include "qres/prrlu.hpp"

namespace qres {

using MultiIndex = std::vector<int>;

/// A degree-L tensor given only through element access, with a shared call
/// counter. The function must be deterministic and safe to call concurrently.
class BlackBoxTensor {
public:
    using Function = std::function<double(std::span<const int>)>;

    BlackBoxTensor(std::size_t degree, std::size_t local_dim, Function f)
        : degree_(degree), local_dim_(local_dim), f_(std::move(f)),
          calls_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
        if (degree == 0 || local_dim == 0)
            throw InvalidInput("BlackBoxTensor: degree and local dimension must be positive");
    }

    std::size_t degree() const noexcept { return degree_; }
    std::size_t local_dim() const noexcept { return local_dim_; }
    std::uint64_t call_count() const noexcept { return calls_->load(); }

    double operator()(std::span<const int> index) const {
        calls_->fetch_add(1, std::memory_order_relaxed);
        return f_(index);
    }

private:
    std::size_t degree_, local_dim_;
    Function f_;
    std::shared_ptr<std::atomic<std::uint64_t>> calls_;
};

struct TciOptions {
    double tol = 1e-8;              ///< relative to the largest sampled magnitude
    std::size_t max_bond = 64;      ///< xi_max
    std::size_t max_sweeps = 20;
    double conditioning_floor = 1e-12; ///< pivots below floor * max|f| are rejected
};

struct TciDiagnostics {
    std::uint64_t n_calls = 0;
    double achieved_error = 0.0; ///< largest relative rejected-pivot error of the final sweep
    std::vector<std::size_t> final_ranks;
    std::size_t sweeps_run = 0;
    bool converged = false;
    std::vector<double> error_history;
    std::size_t seeds_accepted = 0;

    std::size_t max_rank() const {
        return final_ranks.empty() ? 1 : *std::max_element(final_ranks.begin(), final_ranks.end());
    }

    /// n_calls <= c * L * d * xi^2 with xi the largest final rank.
    bool within_call_budget(std::size_t degree, std::size_t local_dim, double c = 10.0) const {
        const double xi = static_cast<double>(max_rank());
        return static_cast<double>(n_calls) <= c * static_cast<double>(degree * local_dim) * xi * xi;
    }
};

/// Working state of two-site cross interpolation.
///
/// For every bond b (between sites b and b+1) the state keeps a list of row
/// prefixes (length b+1) and an equally long list of column suffixes (starting
/// at site b+1). The pivot matrix at bond b is F(rows_b, cols_b) and the slice
/// at site l is F(rows_{l-1} x sigma x cols_l). Sets only grow and stay nested:
/// every row prefix at bond b extends a row prefix of bond b-1, every column
/// suffix at bond b is a local index prepended to a column suffix of bond b+1.
///
/// Sampled entries are memoized, so the black box sees each multi-index once.
class PivotState {
public:
    PivotState(std::size_t degree, std::size_t local_dim)
        : degree_(degree), local_dim_(local_dim), rows_(degree > 0 ? degree - 1 : 0),
          cols_(degree > 0 ? degree - 1 : 0) {}

    std::size_t degree() const noexcept { return degree_; }
    std::size_t local_dim() const noexcept { return local_dim_; }
    std::size_t n_bonds() const noexcept { return rows_.size(); }

    const std::vector<MultiIndex>& row_set(std::size_t bond) const { return rows_.at(bond); }
    const std::vector<MultiIndex>& col_set(std::size_t bond) const { return cols_.at(bond); }

    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        for (const auto& s : rows_)
            r.push_back(s.size());
        return r;
    }

    const std::vector<double>& error_history() const noexcept { return history_; }
    double max_sample() const noexcept { return max_sample_; }
    std::size_t cached_samples() const noexcept { return samples_.size(); }

    /// Memoized F(index).
    double sample(const BlackBoxTensor& f, std::span<const int> index) const {
        std::string key(index.begin(), index.end());
        if (auto it = samples_.find(key); it != samples_.end())
            return it->second;
        const double v = f(index);
        samples_.emplace(std::move(key), v);
        max_sample_ = std::max(max_sample_, std::abs(v));
        return v;
    }

    /// F restricted to (row prefixes) x (column suffixes).
    RealMatrix sample_block(const BlackBoxTensor& f, const std::vector<MultiIndex>& prefixes,
                            const std::vector<MultiIndex>& suffixes) const {
        RealMatrix m(static_cast<Eigen::Index>(prefixes.size()), static_cast<Eigen::Index>(suffixes.size()));
        MultiIndex full;
        for (std::size_t i = 0; i < prefixes.size(); ++i)
            for (std::size_t j = 0; j < suffixes.size(); ++j) {
                full = prefixes[i];
                full.insert(full.end(), suffixes[j].begin(), suffixes[j].end());
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sample(f, full);
            }
        return m;
    }

    /// Row prefixes entering site l (the empty prefix for l = 0).
    std::vector<MultiIndex> left_of(std::size_t site) const {
        return site == 0 ? std::vector<MultiIndex>{MultiIndex{}} : rows_[site - 1];
    }
    /// Column suffixes leaving site l (the empty suffix for the last site).
    std::vector<MultiIndex> right_of(std::size_t site) const {
        return site + 1 == degree_ ? std::vector<MultiIndex>{MultiIndex{}} : cols_[site];
    }

    std::vector<MultiIndex> extend_right(const std::vector<MultiIndex>& prefixes) const {
        std::vector<MultiIndex> out;
        for (const auto& p : prefixes)
            for (int s = 0; s < static_cast<int>(local_dim_); ++s) {
                out.push_back(p);
                out.back().push_back(s);
            }
        return out;
    }
    std::vector<MultiIndex> extend_left(const std::vector<MultiIndex>& suffixes) const {
        std::vector<MultiIndex> out;
        for (int s = 0; s < static_cast<int>(local_dim_); ++s)
            for (const auto& q : suffixes) {
                out.push_back(MultiIndex{s});
                out.back().insert(out.back().end(), q.begin(), q.end());
            }
        return out;
    }

    /// Tensor train F~ = T_1 P_1^{-1} T_2 P_2^{-1} ... T_L.
    MatrixProductState tensor_train(const BlackBoxTensor& f) const {
        std::vector<SiteTensor> sites;
        for (std::size_t l = 0; l < degree_; ++l) {
            const auto left = left_of(l);
            const auto right = right_of(l);
            // left unfolding: row (a, sigma) = a*d + sigma
            RealMatrix t = sample_block(f, extend_right(left), right);
            if (l + 1 < degree_) {
                const RealMatrix p = sample_block(f, rows_[l], cols_[l]);
                Eigen::FullPivLU<RealMatrix> lu(p.transpose());
                t = lu.solve(t.transpose()).transpose();
            }
            sites.push_back(SiteTensor::from_left_unfolding(t.cast<cplx>(), local_dim_));
        }
        return MatrixProductState(std::move(sites));
    }

    /// Value of the current interpolation at one multi-index.
    double interpolate(const BlackBoxTensor& f, std::span<const int> index) const {
        return amplitude(tensor_train(f), index).real();
    }

private:
    friend PivotState tci_initialize(const BlackBoxTensor&, std::span<const int>);
    friend bool tci_add_pivot(PivotState&, const BlackBoxTensor&, std::span<const int>, double, double);
    friend double tci_update_bond(PivotState&, const BlackBoxTensor&, std::size_t, const TciOptions&);
    friend double tci_sweep(PivotState&, const BlackBoxTensor&, double, std::size_t);
    friend double tci_sweep(PivotState&, const BlackBoxTensor&, const TciOptions&);

    std::size_t degree_, local_dim_;
    std::vector<std::vector<MultiIndex>> rows_, cols_;
    std::vector<double> history_;
    mutable std::unordered_map<std::string, double> samples_;
    mutable double max_sample_ = 0.0;
};

namespace detail {

inline void check_index(const BlackBoxTensor& f, std::span<const int> index) {
    if (index.size() != f.degree())
        throw ShapeError("TCI: multi-index length does not match the tensor degree");
    for (int s : index)
        if (s < 0 || static_cast<std::size_t>(s) >= f.local_dim())
            throw ShapeError("TCI: local index out of range");
}

inline std::unordered_map<std::string, Eigen::Index> positions(const std::vector<MultiIndex>& list) {
    std::unordered_map<std::string, Eigen::Index> pos;
    for (std::size_t k = 0; k < list.size(); ++k)
        pos.emplace(std::string(list[k].begin(), list[k].end()), static_cast<Eigen::Index>(k));
    return pos;
}

inline bool contains(const std::vector<MultiIndex>& list, const MultiIndex& x) {
    return std::find(list.begin(), list.end(), x) != list.end();
}

} // namespace detail

/// Rank-1 state whose row and column sets are the prefixes and suffixes of a
/// single start pivot. Requires F(start) != 0.
inline PivotState tci_initialize(const BlackBoxTensor& f, std::span<const int> start) {
    detail::check_index(f, start);
    PivotState state(f.degree(), f.local_dim());
    if (state.sample(f, start) == 0.0)
        throw PivotError("tci_initialize: tensor vanishes at the start pivot");
    for (std::size_t b = 0; b + 1 < f.degree(); ++b) {
        state.rows_[b].emplace_back(start.begin(), start.begin() + static_cast<std::ptrdiff_t>(b + 1));
        state.cols_[b].emplace_back(start.begin() + static_cast<std::ptrdiff_t>(b + 1), start.end());
    }
    return state;
}

/// Inserts an extra seed multi-index into every bond at once (its prefixes into
/// the row sets, its suffixes into the column sets). The seed is skipped when
/// the current interpolation already reproduces it within tol, when it would
/// only partially overlap existing pivots, or when it would make a pivot
/// matrix numerically singular. Returns whether it was inserted.
inline bool tci_add_pivot(PivotState& state, const BlackBoxTensor& f, std::span<const int> pivot, double tol,
                          double conditioning_floor = 1e-12) {
    detail::check_index(f, pivot);
    const double value = state.sample(f, pivot);
    const double ref = state.max_sample();
    if (!(std::abs(value - state.interpolate(f, pivot)) > tol * ref))
        return false;

    const std::size_t n_bonds = state.n_bonds();
    std::vector<bool> insert(n_bonds, false);
    for (std::size_t b = 0; b < n_bonds; ++b) {
        MultiIndex prefix(pivot.begin(), pivot.begin() + static_cast<std::ptrdiff_t>(b + 1));
        MultiIndex suffix(pivot.begin() + static_cast<std::ptrdiff_t>(b + 1), pivot.end());
        const bool has_row = detail::contains(state.rows_[b], prefix);
        const bool has_col = detail::contains(state.cols_[b], suffix);
        if (has_row != has_col)
            return false;
        if (has_row)
            continue;
        // Schur complement of the enlarged pivot matrix
        const RealMatrix p = state.sample_block(f, state.rows_[b], state.cols_[b]);
        const RealMatrix row = state.sample_block(f, {prefix}, state.cols_[b]);
        const RealMatrix col = state.sample_block(f, state.rows_[b], {suffix});
        const double corner = state.sample(f, pivot);
        const double schur = corner - (row * Eigen::FullPivLU<RealMatrix>(p).solve(col))(0, 0);
        if (!(std::abs(schur) > conditioning_floor * ref))
            return false;
        insert[b] = true;
    }
    for (std::size_t b = 0; b < n_bonds; ++b)
        if (insert[b]) {
            state.rows_[b].emplace_back(pivot.begin(), pivot.begin() + static_cast<std::ptrdiff_t>(b + 1));
            state.cols_[b].emplace_back(pivot.begin() + static_cast<std::ptrdiff_t>(b + 1), pivot.end());
        }
    return true;
}

/// Two-site update at one bond: samples the slice Pi on
/// (rows_{b-1} x sigma_b) x (sigma_{b+1} x cols_{b+1}), continues a full-pivoting
/// rank-revealing LU from the existing pivots and appends every new pivot whose
/// error exceeds tol * max|F|, up to max_bond. Returns the largest remaining
/// (rejected) error relative to max|F|.
inline double tci_update_bond(PivotState& state, const BlackBoxTensor& f, std::size_t bond,
                              const TciOptions& opts) {
    const auto row_candidates = state.extend_right(state.left_of(bond));
    const auto col_candidates = state.extend_left(state.right_of(bond + 1));
    const RealMatrix pi = state.sample_block(f, row_candidates, col_candidates);

    const auto row_pos = detail::positions(row_candidates);
    const auto col_pos = detail::positions(col_candidates);
    std::vector<Eigen::Index> rows, cols;
    for (const auto& r : state.rows_[bond]) {
        const auto it = row_pos.find(std::string(r.begin(), r.end()));
        if (it == row_pos.end())
            throw Error("tci_update_bond: row pivots are not nested");
        rows.push_back(it->second);
    }
    for (const auto& c : state.cols_[bond]) {
        const auto it = col_pos.find(std::string(c.begin(), c.end()));
        if (it == col_pos.end())
            throw Error("tci_update_bond: column pivots are not nested");
        cols.push_back(it->second);
    }

    const double ref = state.max_sample();
    const auto ext = extend_cross(pi, rows, cols, opts.tol * ref, opts.conditioning_floor * ref, opts.max_bond);
    for (std::size_t k = 0; k < ext.new_rows.size(); ++k) {
        state.rows_[bond].push_back(row_candidates[static_cast<std::size_t>(ext.new_rows[k])]);
        state.cols_[bond].push_back(col_candidates[static_cast<std::size_t>(ext.new_cols[k])]);
    }
    return ref > 0.0 ? ext.remaining_error / ref : 0.0;
}

/// One left-to-right plus right-to-left pass over all bonds. Returns the largest
/// relative rejected-pivot error seen during the pass.
inline double tci_sweep(PivotState& state, const BlackBoxTensor& f, const TciOptions& opts) {
    const std::size_t n_bonds = state.n_bonds();
    double err = 0.0;
    for (std::size_t b = 0; b < n_bonds; ++b)
        err = std::max(err, tci_update_bond(state, f, b, opts));
    for (std::size_t b = n_bonds; b-- > 0;)
        err = std::max(err, tci_update_bond(state, f, b, opts));
    state.history_.push_back(err);
    return err;
}

inline double tci_sweep(PivotState& state, const BlackBoxTensor& f, double tol, std::size_t max_bond) {
    TciOptions opts;
    opts.tol = tol;
    opts.max_bond = max_bond;
    return tci_sweep(state, f, opts);
}

struct TciResult {
    MatrixProductState tt;
    TciDiagnostics diagnostics;
    PivotState state;
};

/// Cross interpolation of a black-box tensor into a tensor train. The first
/// start pivot must be a nonzero entry; further pivots are optional seeds.
/// Sweeps until a sweep adds no pivot or max_sweeps is reached; converged
/// means that last sweep saw no relative pivot error above tol.
inline TciResult tci_run(const BlackBoxTensor& f, const TciOptions& opts, std::span<const MultiIndex> start_pivots) {
    if (start_pivots.empty())
        throw PivotError("tci_run: no start pivot");
    if (opts.max_bond == 0)
        throw InvalidInput("tci_run: max_bond must be positive");
    const std::uint64_t calls_before = f.call_count();

    PivotState state = tci_initialize(f, start_pivots.front());
    TciDiagnostics diag;
    for (std::size_t k = 1; k < start_pivots.size(); ++k) {
        detail::check_index(f, start_pivots[k]);
        if (tci_add_pivot(state, f, start_pivots[k], opts.tol, opts.conditioning_floor))
            ++diag.seeds_accepted;
    }

    if (state.n_bonds() == 0) {
        // a single site is sampled exhaustively by its one slice
        diag.converged = true;
    }
    for (std::size_t sweep = 0; sweep < opts.max_sweeps && state.n_bonds() > 0; ++sweep) {
        const auto ranks_before = state.ranks();
        const double err = tci_sweep(state, f, opts);
        diag.sweeps_run = sweep + 1;
        diag.achieved_error = err;
        // a slice can only reveal rank its neighbouring sets support, so the
        // error is trusted only once a whole sweep adds nothing
        if (state.ranks() == ranks_before) {
            diag.converged = err < opts.tol;
            break;
        }
    }

    auto tt = state.tensor_train(f);
    diag.final_ranks = state.ranks();
    diag.error_history = state.error_history();
    diag.n_calls = f.call_count() - calls_before;
    return {std::move(tt), std::move(diag), std::move(state)};
}

inline TciResult tci_run(const BlackBoxTensor& f, const TciOptions& opts, std::span<const int> start_pivot) {
    const std::vector<MultiIndex> pivots{MultiIndex(start_pivot.begin(), start_pivot.end())};
    return tci_run(f, opts, std::span<const MultiIndex>(pivots));
}

/// Out-of-sample check: max |F(sigma) - F~(sigma)| over seeded random multi-indices.
inline double interpolation_error_estimate(const PivotState& state, const BlackBoxTensor& f, std::size_t n_samples,
                                           std::uint64_t seed) {
    if (n_samples == 0)
        throw InvalidInput("interpolation_error_estimate: need at least one sample");
    const auto tt = state.tensor_train(f);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(f.local_dim()) - 1);
    MultiIndex idx(f.degree());
    double err = 0.0;
    for (std::size_t k = 0; k < n_samples; ++k) {
        for (auto& s : idx)
            s = pick(rng);
        err = std::max(err, std::abs(f(idx) - amplitude(tt, idx).real()));
    }
    return err;
}

} // namespace qres
