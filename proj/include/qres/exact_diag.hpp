#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qres/dense_tensor.hpp"
#include "qres/errors.hpp"
#include "qres/lanczos.hpp"
#include "qres/spin_model.hpp"

namespace qres {

struct GroundState {
    double energy = 0.0;
    DenseTensor state;
    double residual = 0.0;
    std::size_t iterations = 0;
};

/// Lanczos ground state of the Ising model on the full 2^N space.
///
/// The iteration starts from the uniform superposition, which lies in the
/// +1 sector of the global spin flip prod_i X_i. The Hamiltonian commutes with
/// that flip, so the result stays in the symmetric sector; at h = 0 this
/// selects the GHZ combination of the two degenerate ferromagnetic states.
inline GroundState ed_ground_state(const SpinModel& model, double lanczos_tol = 1e-10,
                                   std::size_t max_iter = 500, std::size_t site_cap = default_site_cap) {
    const IsingHamiltonian ham(model, site_cap);
    const auto dim = static_cast<Eigen::Index>(ham.dim());

    LanczosOptions opts;
    opts.tol = lanczos_tol;
    opts.max_iter = max_iter;
    // keep the Krylov basis under ~512 MB
    const std::size_t per_vector = ham.dim() * sizeof(cplx);
    opts.krylov_dim = std::clamp<std::size_t>((std::size_t{1} << 29) / per_vector, 6, 60);

    Vector start = Vector::Ones(dim);
    auto res = lanczos_lowest([&](const Vector& v) { return ham.apply(v); }, start, opts);
    if (!res.converged)
        throw ConvergenceError("ed_ground_state: Lanczos did not converge for " + model.label(), res.residual);

    // fix the global phase: largest component real and positive
    Eigen::Index arg = 0;
    res.vector.cwiseAbs().maxCoeff(&arg);
    const cplx phase = std::conj(res.vector(arg)) / std::abs(res.vector(arg));
    res.vector *= phase;
    res.vector.normalize();

    std::vector<cplx> data(res.vector.data(), res.vector.data() + res.vector.size());
    return {res.eigenvalue, DenseTensor::state(model.n_sites(), 2, std::move(data)), res.residual, res.iterations};
}

} // namespace qres
