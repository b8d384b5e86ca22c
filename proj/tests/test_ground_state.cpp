#include <chrono>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qres/dmrg.hpp"
#include "qres/exact_diag.hpp"
#include "qres/mpo.hpp"
#include "qres/spin_model.hpp"

using namespace qres;

TEST(SpinModel, ChainBonds) {
    EXPECT_EQ(build_tfim_1d(4, 1.0, true).bonds().size(), 4u);
    EXPECT_EQ(build_tfim_1d(4, 1.0, false).bonds().size(), 3u);
    EXPECT_EQ(build_tfim_1d(2, 1.0, true).bonds().size(), 1u);
    const auto ring = build_tfim_1d(5, 0.3, true);
    EXPECT_EQ(ring.bonds().back(), (SpinModel::Bond{0, 4}));
    EXPECT_THROW(build_tfim_1d(1, 1.0, true), InvalidInput);
    EXPECT_THROW(build_tfim_1d(4, -1.0, true), InvalidInput);
}

TEST(SpinModel, GridBonds) {
    EXPECT_EQ(build_tfim_2d(3, 3, 1.0, true).bonds().size(), 18u);
    EXPECT_EQ(build_tfim_2d(2, 2, 1.0, true).bonds().size(), 4u);
    EXPECT_EQ(build_tfim_2d(3, 4, 1.0, false).bonds().size(), 17u);
    EXPECT_EQ(build_tfim_2d(4, 4, 1.0, true).bonds().size(), 32u);
    EXPECT_THROW(build_tfim_2d(1, 3, 1.0, true), InvalidInput);
}

TEST(SpinModel, SnakeMappingIsBijection) {
    const auto m = build_tfim_2d(4, 3, 1.0, true);
    std::vector<bool> hit(m.n_sites(), false);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 4; ++c) {
            const auto s = m.site_of(r, c);
            EXPECT_FALSE(hit[s]);
            hit[s] = true;
            EXPECT_EQ(m.coords_of(s), std::make_pair(r, c));
        }
    // odd rows run right to left
    EXPECT_EQ(m.site_of(1, 3), 4u);
    EXPECT_EQ(m.site_of(1, 0), 7u);
    // every grid bond joins lattice neighbours
    for (const auto& [i, j] : m.bonds()) {
        const auto [ri, ci] = m.coords_of(i);
        const auto [rj, cj] = m.coords_of(j);
        const auto dr = std::min((ri + 3 - rj) % 3, (rj + 3 - ri) % 3);
        const auto dc = std::min((ci + 4 - cj) % 4, (cj + 4 - ci) % 4);
        EXPECT_EQ(dr + dc, 1u);
    }
}

TEST(ApplyHamiltonian, EigenvectorsAtLimits) {
    const auto model = build_tfim_1d(6, 0.0, true);
    auto up = DenseTensor::state(6, 2, std::vector<cplx>(64, 0.0));
    up[0] = 1.0;
    const auto hv = apply_hamiltonian(model, up);
    EXPECT_NEAR(std::abs(hv[0] - cplx(-6.0)), 0.0, 1e-14);

    // the field term alone has |+...+> as eigenvector with value -hN
    const double h = 0.7;
    const auto with_field = build_tfim_1d(6, h, true);
    const auto plus = oracle::to_tensor(oracle::product_dense(oracle::plus_state(), 6), 6);
    const Vector diff = apply_hamiltonian(with_field, plus).as_vector() - apply_hamiltonian(model, plus).as_vector();
    EXPECT_LE((diff + h * 6.0 * plus.as_vector()).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(ApplyHamiltonian, MatchesDenseMatrix) {
    for (const auto& model : {build_tfim_1d(6, 0.8, true), build_tfim_1d(6, 1.3, false), build_tfim_2d(3, 2, 0.4, true)}) {
        const auto v = oracle::random_state(model.n_sites(), 2, 11);
        const Vector expected = oracle::hamiltonian(model) * v.as_vector();
        EXPECT_LE((apply_hamiltonian(model, v).as_vector() - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(ApplyHamiltonian, HermitianAndCapped) {
    const auto model = build_tfim_2d(3, 3, 1.1, true);
    const auto u = oracle::random_state(9, 2, 1), v = oracle::random_state(9, 2, 2);
    const cplx uhv = u.as_vector().dot(apply_hamiltonian(model, v).as_vector());
    const cplx vhu = v.as_vector().dot(apply_hamiltonian(model, u).as_vector());
    EXPECT_LE(std::abs(uhv - std::conj(vhu)), 1e-12);
    EXPECT_THROW(apply_hamiltonian(model, v, 8), ResourceLimit);
}

TEST(ExactDiag, ClassicalLimits) {
    const auto chain = ed_ground_state(build_tfim_1d(6, 0.0, true));
    EXPECT_NEAR(chain.energy, -6.0, 1e-10);
    // symmetric sector: GHZ
    EXPECT_NEAR(chain.state[0].real(), 1.0 / std::sqrt(2.0), 1e-8);
    EXPECT_NEAR(chain.state[63].real(), 1.0 / std::sqrt(2.0), 1e-8);

    const auto grid = ed_ground_state(build_tfim_2d(3, 3, 0.0, true));
    EXPECT_NEAR(grid.energy, -18.0, 1e-10);
}

TEST(ExactDiag, MatchesDenseDiagonalization) {
    const auto model = build_tfim_1d(8, 1.0, true);
    const auto gs = ed_ground_state(model);
    EXPECT_NEAR(gs.energy, oracle::dense_ground_energy(model), 1e-10);
    EXPECT_NEAR(gs.state.norm(), 1.0, 1e-12);
    const Vector r = apply_hamiltonian(model, gs.state).as_vector() - gs.energy * gs.state.as_vector();
    EXPECT_LE(r.norm(), 1e-10 * std::abs(gs.energy));
}

TEST(ExactDiag, EnergyDecreasesWithField) {
    double previous = 0.0;
    for (double h : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        const double e = ed_ground_state(build_tfim_2d(2, 3, h, true)).energy;
        EXPECT_LT(e, previous + 1e-12);
        previous = e;
    }
}

TEST(ExactDiag, ReportsNonConvergence) {
    EXPECT_THROW(ed_ground_state(build_tfim_1d(10, 1.0, true), 1e-14, 3), ConvergenceError);
}

TEST(Mpo, OpenChainHasBondThree) {
    const auto mpo = mpo_from_model(build_tfim_1d(4, 0.9, false));
    EXPECT_EQ(mpo.bond_dims(), (std::vector<std::size_t>{1, 3, 3, 3, 1}));
}

TEST(Mpo, MatchesMatrixFreeAction) {
    for (const auto& model :
         {build_tfim_1d(6, 0.7, true), build_tfim_1d(6, 0.7, false), build_tfim_2d(3, 3, 1.2, true),
          build_tfim_2d(2, 4, 0.3, true), build_tfim_1d(2, 0.5, true)}) {
        const auto mpo = mpo_from_model(model);
        const Matrix h = mpo_to_matrix(mpo);
        const auto v = oracle::random_state(model.n_sites(), 2, 3);
        const Vector expected = apply_hamiltonian(model, v).as_vector();
        EXPECT_LE((h * v.as_vector() - expected).cwiseAbs().maxCoeff(), 1e-10) << model.label();
    }
    // the ring closure adds one channel
    EXPECT_EQ(mpo_from_model(build_tfim_1d(6, 0.7, true)).max_bond(), 4u);
}

TEST(Dmrg, MatchesLanczos) {
    struct Case {
        std::size_t n;
        double h;
    };
    for (const auto& c : {Case{10, 0.5}, Case{12, 2.0}}) {
        const auto model = build_tfim_1d(c.n, c.h, true);
        const auto ed = ed_ground_state(model);
        DmrgOptions opts;
        opts.max_bond = 64;
        const auto res = dmrg_ground_state(model, opts);
        EXPECT_TRUE(res.converged);
        EXPECT_NEAR(res.energy, ed.energy, 1e-8) << c.n << " " << c.h;
        EXPECT_NEAR(norm(res.psi), 1.0, 1e-10);
        EXPECT_EQ(res.psi.canonical_center(), std::optional<std::size_t>(0));
        for (std::size_t l = 1; l < res.psi.size(); ++l)
            EXPECT_LE(right_isometry_deviation(res.psi.site(l)), 1e-10);
        // same state up to a phase
        const double overlap = std::abs(to_dense(res.psi).as_vector().dot(ed.state.as_vector()));
        EXPECT_NEAR(overlap, 1.0, 1e-6);
    }
}

TEST(Dmrg, ClassicalLimit) {
    const auto res = dmrg_ground_state(build_tfim_1d(8, 0.0, true));
    EXPECT_NEAR(res.energy, -8.0, 1e-8);
}
