#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qres/prrlu.hpp"
#include "qres/tci.hpp"

namespace {

using qres::MultiIndex;
using qres::RealMatrix;

// Real tensor train with Gaussian cores: F(s) = G_1[s_1] ... G_L[s_L].
struct PlantedTrain {
    std::size_t L, d;
    std::vector<std::vector<RealMatrix>> cores;

    PlantedTrain(std::size_t L_, std::size_t d_, std::size_t rank, unsigned seed) : L(L_), d(d_) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g;
        for (std::size_t l = 0; l < L; ++l) {
            const Eigen::Index left = l == 0 ? 1 : static_cast<Eigen::Index>(rank);
            const Eigen::Index right = l + 1 == L ? 1 : static_cast<Eigen::Index>(rank);
            std::vector<RealMatrix> slices;
            for (std::size_t s = 0; s < d; ++s) {
                RealMatrix m(left, right);
                for (Eigen::Index i = 0; i < m.size(); ++i)
                    m.data()[i] = g(rng);
                slices.push_back(m);
            }
            cores.push_back(slices);
        }
    }

    double operator()(std::span<const int> s) const {
        RealMatrix v = cores[0][static_cast<std::size_t>(s[0])];
        for (std::size_t l = 1; l < L; ++l)
            v = v * cores[l][static_cast<std::size_t>(s[l])];
        return v(0, 0);
    }
};

std::vector<MultiIndex> all_indices(std::size_t L, std::size_t d) {
    std::vector<MultiIndex> out;
    MultiIndex idx(L, 0);
    while (true) {
        out.push_back(idx);
        std::size_t k = L;
        while (k > 0) {
            --k;
            if (++idx[k] < static_cast<int>(d))
                break;
            idx[k] = 0;
            if (k == 0)
                return out;
        }
    }
}

double max_error(const qres::MatrixProductState& tt, const std::function<double(std::span<const int>)>& f,
                 std::size_t L, std::size_t d) {
    double err = 0.0;
    for (const auto& idx : all_indices(L, d))
        err = std::max(err, std::abs(f(idx) - qres::amplitude(tt, idx).real()));
    return err;
}

MultiIndex argmax_index(const std::function<double(std::span<const int>)>& f, std::size_t L, std::size_t d) {
    MultiIndex best;
    double v = -1.0;
    for (const auto& idx : all_indices(L, d))
        if (std::abs(f(idx)) > v) {
            v = std::abs(f(idx));
            best = idx;
        }
    return best;
}

} // namespace

TEST(ExtendCross, RecoversLowRankMatrix) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    RealMatrix u(12, 3), v(3, 9);
    for (Eigen::Index i = 0; i < u.size(); ++i)
        u.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v.data()[i] = g(rng);
    const RealMatrix a = u * v;
    const auto ext = qres::extend_cross(a, {}, {}, 1e-12, 1e-14, 100);
    EXPECT_EQ(ext.new_rows.size(), 3u);
    EXPECT_LT(ext.remaining_error, 1e-10);
    RealMatrix pivot(3, 3), left(12, 3), top(3, 9);
    for (Eigen::Index k = 0; k < 3; ++k) {
        left.col(k) = a.col(ext.new_cols[k]);
        top.row(k) = a.row(ext.new_rows[k]);
        for (Eigen::Index j = 0; j < 3; ++j)
            pivot(k, j) = a(ext.new_rows[k], ext.new_cols[j]);
    }
    EXPECT_LT((a - left * pivot.fullPivLu().solve(top)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(ExtendCross, ContinuesFromGivenPivots) {
    RealMatrix a(3, 3);
    a << 1, 2, 3, 4, 5, 6, 7, 8, 10;
    const std::vector<Eigen::Index> rows{2}, cols{2};
    const auto ext = qres::extend_cross(a, rows, cols, 1e-12, 1e-14, 10);
    EXPECT_EQ(ext.new_rows.size(), 2u);
    for (auto r : ext.new_rows)
        EXPECT_NE(r, 2);
    for (auto c : ext.new_cols)
        EXPECT_NE(c, 2);
}

TEST(ExtendCross, RespectsRankCapAndReportsError) {
    RealMatrix a = RealMatrix::Identity(4, 4);
    a(3, 3) = 0.5;
    const auto ext = qres::extend_cross(a, {}, {}, 1e-12, 1e-14, 3);
    EXPECT_EQ(ext.new_rows.size(), 3u);
    EXPECT_DOUBLE_EQ(ext.remaining_error, 0.5);
}

TEST(ExtendCross, SingularPivotsThrow) {
    RealMatrix a = RealMatrix::Zero(2, 2);
    const std::vector<Eigen::Index> rows{0}, cols{0};
    EXPECT_THROW(qres::extend_cross(a, rows, cols, 0.0, 0.0, 2), qres::PivotError);
}

TEST(Tci, SeparableTensorIsRankOne) {
    const std::vector<double> w{0.3, 1.1, -0.7};
    auto f = [&](std::span<const int> s) {
        double p = 1.0;
        for (std::size_t l = 0; l < s.size(); ++l)
            p *= 1.0 + w[static_cast<std::size_t>(s[l])] * static_cast<double>(l + 1);
        return p;
    };
    qres::BlackBoxTensor box(6, 3, f);
    qres::TciOptions opts;
    opts.tol = 1e-12;
    const auto res = qres::tci_run(box, opts, MultiIndex(6, 1));
    EXPECT_TRUE(res.diagnostics.converged);
    for (auto r : res.diagnostics.final_ranks)
        EXPECT_EQ(r, 1u);
    EXPECT_LT(max_error(res.tt, f, 6, 3), 1e-12 * std::abs(f(MultiIndex(6, 1))));
}

TEST(Tci, SumOfTwoProductsIsRankTwo) {
    // F = prod cos(a_l s_l) + prod sin(b_l s_l + 1)
    auto f = [](std::span<const int> s) {
        double p = 1.0, q = 1.0;
        for (std::size_t l = 0; l < s.size(); ++l) {
            p *= std::cos(0.4 * static_cast<double>(l + 1) * s[l]);
            q *= std::sin(0.3 * static_cast<double>(s[l]) + 1.0 + 0.1 * static_cast<double>(l));
        }
        return p + q;
    };
    qres::BlackBoxTensor box(6, 2, f);
    qres::TciOptions opts;
    opts.tol = 1e-12;
    const auto res = qres::tci_run(box, opts, argmax_index(f, 6, 2));
    EXPECT_TRUE(res.diagnostics.converged);
    for (auto r : res.diagnostics.final_ranks)
        EXPECT_EQ(r, 2u);
    EXPECT_LT(max_error(res.tt, f, 6, 2), 1e-11);
}

TEST(Tci, RandomTrainExactRecovery) {
    for (std::size_t d : {2u, 4u}) {
        const PlantedTrain planted(8, d, 3, 11 + static_cast<unsigned>(d));
        auto f = [&](std::span<const int> s) { return planted(s); };
        qres::BlackBoxTensor box(8, d, f);
        qres::TciOptions opts;
        opts.tol = 1e-12;
        const auto res = qres::tci_run(box, opts, argmax_index(f, 8, d));
        EXPECT_TRUE(res.diagnostics.converged) << "d=" << d;
        for (std::size_t b = 0; b < 7; ++b) {
            std::size_t cap = 1, left = 1, right = 1;
            for (std::size_t k = 0; k <= b; ++k)
                left *= d;
            for (std::size_t k = b + 1; k < 8; ++k)
                right *= d;
            cap = std::min<std::size_t>({3, left, right});
            EXPECT_EQ(res.diagnostics.final_ranks[b], cap) << "d=" << d << " bond " << b;
        }
        double scale = 0.0;
        for (const auto& idx : all_indices(8, d))
            scale = std::max(scale, std::abs(f(idx)));
        EXPECT_LT(max_error(res.tt, f, 8, d), 1e-10 * scale) << "d=" << d;
        EXPECT_TRUE(res.diagnostics.within_call_budget(8, d));
    }
}

TEST(Tci, InterpolatesExactlyAtPivots) {
    const PlantedTrain planted(7, 2, 4, 5);
    auto f = [&](std::span<const int> s) { return planted(s); };
    qres::BlackBoxTensor box(7, 2, f);
    qres::TciOptions opts;
    opts.tol = 1e-3;
    opts.max_bond = 2;
    const auto res = qres::tci_run(box, opts, argmax_index(f, 7, 2));
    for (std::size_t b = 0; b + 1 < 7; ++b)
        for (std::size_t k = 0; k < res.state.row_set(b).size(); ++k) {
            // row pivot joined with each column pivot of the same bond
            for (const auto& col : res.state.col_set(b)) {
                MultiIndex idx = res.state.row_set(b)[k];
                idx.insert(idx.end(), col.begin(), col.end());
                EXPECT_NEAR(qres::amplitude(res.tt, idx).real(), f(idx), 1e-10 * std::abs(f(idx)) + 1e-12);
            }
        }
}

TEST(Tci, RanksAreMonotoneAcrossSweeps) {
    const PlantedTrain planted(8, 2, 4, 21);
    auto f = [&](std::span<const int> s) { return planted(s); };
    qres::BlackBoxTensor box(8, 2, f);
    auto state = qres::tci_initialize(box, argmax_index(f, 8, 2));
    auto prev = state.ranks();
    for (int k = 0; k < 4; ++k) {
        qres::tci_sweep(state, box, 1e-12, 64);
        const auto now = state.ranks();
        for (std::size_t b = 0; b < now.size(); ++b)
            EXPECT_GE(now[b], prev[b]);
        prev = now;
    }
    EXPECT_EQ(state.error_history().size(), 4u);
}

TEST(Tci, DeterministicAcrossRuns) {
    const PlantedTrain planted(8, 4, 2, 8);
    auto f = [&](std::span<const int> s) { return planted(s); };
    qres::TciOptions opts;
    opts.tol = 1e-10;
    const MultiIndex start(8, 2);
    qres::BlackBoxTensor a(8, 4, f), b(8, 4, f);
    const auto r1 = qres::tci_run(a, opts, start);
    const auto r2 = qres::tci_run(b, opts, start);
    EXPECT_EQ(r1.diagnostics.n_calls, r2.diagnostics.n_calls);
    EXPECT_EQ(r1.diagnostics.final_ranks, r2.diagnostics.final_ranks);
    for (std::size_t bnd = 0; bnd < 7; ++bnd)
        EXPECT_EQ(r1.state.row_set(bnd), r2.state.row_set(bnd));
}

TEST(Tci, NCallsCountsUniqueEvaluations) {
    const PlantedTrain planted(6, 2, 2, 9);
    auto f = [&](std::span<const int> s) { return planted(s); };
    qres::BlackBoxTensor box(6, 2, f);
    qres::TciOptions opts;
    opts.tol = 1e-12;
    const auto res = qres::tci_run(box, opts, argmax_index(f, 6, 2));
    EXPECT_EQ(res.diagnostics.n_calls, res.state.cached_samples());
    EXPECT_LE(res.diagnostics.n_calls, 64u);
}

TEST(Tci, ErrorEstimate) {
    const PlantedTrain planted(8, 2, 4, 13);
    auto f = [&](std::span<const int> s) { return planted(s); };
    qres::BlackBoxTensor box(8, 2, f);
    qres::TciOptions full;
    full.tol = 1e-12;
    const auto exact = qres::tci_run(box, full, argmax_index(f, 8, 2));
    EXPECT_LT(qres::interpolation_error_estimate(exact.state, box, 50, 1), 1e-9);

    qres::TciOptions capped = full;
    capped.max_bond = 2;
    const auto truncated = qres::tci_run(box, capped, argmax_index(f, 8, 2));
    EXPECT_FALSE(truncated.diagnostics.converged);
    EXPECT_GT(qres::interpolation_error_estimate(truncated.state, box, 50, 1), 1e-6);
    EXPECT_THROW(qres::interpolation_error_estimate(exact.state, box, 0, 1), qres::InvalidInput);
}

TEST(Tci, SeedPivotReachesSecondBranch) {
    // GHZ-like: nonzero only on all-zero and all-one strings
    auto f = [](std::span<const int> s) {
        for (int x : s)
            if (x != s[0])
                return 0.0;
        return s[0] == 0 ? 1.0 : 0.5;
    };
    qres::BlackBoxTensor box(10, 2, f);
    qres::TciOptions opts;
    opts.tol = 1e-12;
    const auto single = qres::tci_run(box, opts, MultiIndex(10, 0));
    EXPECT_GT(std::abs(qres::amplitude(single.tt, MultiIndex(10, 1)).real() - 0.5), 0.4);

    const std::vector<MultiIndex> seeds{MultiIndex(10, 0), MultiIndex(10, 1)};
    const auto both = qres::tci_run(box, opts, seeds);
    EXPECT_EQ(both.diagnostics.seeds_accepted, 1u);
    EXPECT_LT(max_error(both.tt, f, 10, 2), 1e-12);
}

TEST(Tci, SeedAlreadyInterpolatedIsSkipped) {
    auto f = [](std::span<const int> s) { return 1.0 + 0.0 * s[0]; };
    qres::BlackBoxTensor box(4, 2, f);
    auto state = qres::tci_initialize(box, MultiIndex(4, 0));
    EXPECT_FALSE(qres::tci_add_pivot(state, box, MultiIndex(4, 1), 1e-12));
}

TEST(Tci, InvalidInputs) {
    auto f = [](std::span<const int>) { return 0.0; };
    qres::BlackBoxTensor box(4, 2, f);
    EXPECT_THROW(qres::tci_initialize(box, MultiIndex(4, 0)), qres::PivotError);
    EXPECT_THROW(qres::tci_initialize(box, MultiIndex(3, 0)), qres::ShapeError);
    EXPECT_THROW(qres::tci_initialize(box, MultiIndex{0, 0, 0, 2}), qres::ShapeError);
    EXPECT_THROW(qres::BlackBoxTensor(0, 2, f), qres::InvalidInput);
}
