#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qres/dense_tensor.hpp"
#include "qres/errors.hpp"
#include "qres/mps.hpp"
#include "qres/pauli.hpp"
#include "qres/prefix_cache.hpp"
#include "qres/tci.hpp"

namespace qres {

enum class Measure { SRE2, REC };

inline std::string measure_name(Measure m) { return m == Measure::SRE2 ? "SRE2" : "REC"; }

struct ResourceReport {
    Measure measure = Measure::SRE2;
    double value = 0.0;
    double raw_value = 0.0; ///< before clamping
    std::size_t input_chi = 0;
    std::size_t tci_xi = 0;
    std::uint64_t n_calls = 0;
    double achieved_error = 0.0;
    double wall_time = 0.0; ///< seconds
    bool converged = false;
    std::size_t sweeps = 0;
    double cache_hit_rate = 0.0;
};

struct ResourceOptions {
    double tol = 1e-8;
    std::size_t max_bond = 80;
    std::size_t max_sweeps = 20;
    bool use_cache = true;
    std::size_t cache_bytes = PrefixCache::default_capacity_bytes;
    std::vector<int> start_pivot; ///< REC only; empty selects the dominant configuration
    std::uint64_t seed = 0;       ///< REC fallback search when the dominant amplitude underflows

    static ResourceOptions defaults(Measure m) {
        ResourceOptions o;
        o.max_bond = m == Measure::SRE2 ? 80 : 40;
        return o;
    }
};

/// Black box together with the cache it draws on.
struct QuantifierBox {
    BlackBoxTensor tensor;
    std::shared_ptr<PrefixCache> cache;
};

inline constexpr double underflow_floor = 1e-154;

namespace detail {

inline void check_normalized(const MatrixProductState& psi) {
    if (psi.phys_dim() != 2)
        throw ShapeError("resources: physical dimension must be 2");
    if (std::abs(norm(psi) - 1.0) > 1e-8)
        throw InvalidInput("resources: state is not normalized");
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Pauli string (index 0..3 = I,X,Y,Z per site) -> <psi|P|psi>^4.
inline QuantifierBox sre2_function(const MatrixProductState& psi, bool use_cache = true,
                                   std::size_t cache_bytes = PrefixCache::default_capacity_bytes) {
    detail::check_normalized(psi);
    auto state = std::make_shared<const MatrixProductState>(psi);
    auto cache = std::make_shared<PrefixCache>(
        psi.size(),
        [state](std::size_t l, int p, const Matrix& env) {
            return pauli_transfer_left(state->site(l), static_cast<Pauli>(p), env);
        },
        [state](std::size_t l, int p, const Matrix& env) {
            return pauli_transfer_right(state->site(l), static_cast<Pauli>(p), env);
        },
        [](const Matrix& e, const Matrix& g) { return e.cwiseProduct(g).sum(); }, cache_bytes, use_cache);
    BlackBoxTensor tensor(psi.size(), 4, [cache](std::span<const int> idx) {
        const double x = cache->evaluate(idx).real();
        if (std::abs(x) < underflow_floor)
            return 0.0;
        const double x2 = x * x;
        return x2 * x2;
    });
    return {std::move(tensor), std::move(cache)};
}

/// Basis configuration S -> |<S|psi>|^2 log2 |<S|psi>|^2, exactly 0 on zero amplitudes.
inline QuantifierBox rec_function(const MatrixProductState& psi, bool use_cache = true,
                                  std::size_t cache_bytes = PrefixCache::default_capacity_bytes) {
    detail::check_normalized(psi);
    auto state = std::make_shared<const MatrixProductState>(psi);
    auto cache = std::make_shared<PrefixCache>(
        psi.size(),
        [state](std::size_t l, int s, const Matrix& env) {
            return Matrix(env * state->site(l).slice(static_cast<std::size_t>(s)));
        },
        [state](std::size_t l, int s, const Matrix& env) {
            return Matrix(state->site(l).slice(static_cast<std::size_t>(s)) * env);
        },
        [](const Matrix& v, const Matrix& u) { return (v * u)(0, 0); }, cache_bytes, use_cache);
    BlackBoxTensor tensor(psi.size(), 2, [cache](std::span<const int> idx) {
        const cplx c = cache->evaluate(idx);
        if (std::abs(c) < underflow_floor)
            return 0.0;
        const double p = std::norm(c);
        return p * std::log2(p);
    });
    return {std::move(tensor), std::move(cache)};
}

inline BlackBoxTensor sre2_blackbox(const MatrixProductState& psi) { return sre2_function(psi).tensor; }
inline BlackBoxTensor rec_blackbox(const MatrixProductState& psi) { return rec_function(psi).tensor; }

/// Configuration picked site by site by the largest prefix weight of the
/// right-canonical form.
inline std::vector<int> dominant_configuration(const MatrixProductState& psi) {
    const auto canon = canonicalize(psi, 0);
    std::vector<int> config;
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    for (std::size_t l = 0; l < canon.size(); ++l) {
        Eigen::RowVectorXcd best;
        double best_w = -1.0;
        int best_s = 0;
        for (std::size_t s = 0; s < canon.phys_dim(); ++s) {
            Eigen::RowVectorXcd w = v * canon.site(l).slice(s);
            if (w.squaredNorm() > best_w) {
                best_w = w.squaredNorm();
                best = std::move(w);
                best_s = static_cast<int>(s);
            }
        }
        config.push_back(best_s);
        v = best;
    }
    return config;
}

namespace detail {

inline ResourceReport finish_report(Measure m, const MatrixProductState& psi, const TciResult& run,
                                    const PrefixCache& cache) {
    ResourceReport r;
    r.measure = m;
    r.input_chi = psi.max_bond();
    r.tci_xi = run.diagnostics.max_rank();
    r.n_calls = run.diagnostics.n_calls;
    r.achieved_error = run.diagnostics.achieved_error;
    r.converged = run.diagnostics.converged;
    r.sweeps = run.diagnostics.sweeps_run;
    r.cache_hit_rate = cache.hit_rate();
    return r;
}

inline TciOptions tci_options(const ResourceOptions& opts) {
    TciOptions t;
    t.tol = opts.tol;
    t.max_bond = opts.max_bond;
    t.max_sweeps = opts.max_sweeps;
    return t;
}

} // namespace detail

/// Stabilizer Renyi-2 entropy M2 = -log2(sum_P <P>^4 / 2^L) through cross
/// interpolation of the Pauli-spectrum tensor. Seeds: all-I, plus all-X for the
/// second branch of Z2-symmetric states.
inline ResourceReport sre2(const MatrixProductState& psi, const ResourceOptions& opts = ResourceOptions::defaults(Measure::SRE2)) {
    const auto t0 = std::chrono::steady_clock::now();
    auto box = sre2_function(psi, opts.use_cache, opts.cache_bytes);
    const std::size_t n = psi.size();
    const std::vector<MultiIndex> seeds{MultiIndex(n, static_cast<int>(Pauli::I)),
                                        MultiIndex(n, static_cast<int>(Pauli::X))};
    const auto run = tci_run(box.tensor, detail::tci_options(opts), std::span<const MultiIndex>(seeds));
    auto report = detail::finish_report(Measure::SRE2, psi, run, *box.cache);
    const double total = sum_all(run.tt).real();
    report.raw_value = -std::log2(total / std::ldexp(1.0, static_cast<int>(n)));
    report.value = (report.raw_value < 0.0 && report.raw_value >= -1e-9) ? 0.0 : report.raw_value;
    report.wall_time = detail::elapsed(t0);
    return report;
}

/// Relative entropy of coherence -sum_S |c_S|^2 log2 |c_S|^2 for a pure state.
inline ResourceReport rec(const MatrixProductState& psi, const ResourceOptions& opts = ResourceOptions::defaults(Measure::REC)) {
    const auto t0 = std::chrono::steady_clock::now();
    auto box = rec_function(psi, opts.use_cache, opts.cache_bytes);

    std::vector<int> start = opts.start_pivot.empty() ? dominant_configuration(psi) : opts.start_pivot;
    detail::check_index(box.tensor, start);
    const double weight = std::norm(amplitude(psi, start));
    if (opts.start_pivot.empty() && weight < 1e-300) {
        std::mt19937_64 rng(opts.seed);
        std::bernoulli_distribution coin;
        for (int tries = 0; tries < 100000 && std::norm(amplitude(psi, start)) < 1e-300; ++tries)
            for (auto& s : start)
                s = coin(rng) ? 1 : 0;
    }
    if (std::abs(1.0 - std::norm(amplitude(psi, start))) < 1e-12) {
        // a basis state: every sampled value is exactly zero
        ResourceReport r;
        r.measure = Measure::REC;
        r.input_chi = psi.max_bond();
        r.tci_xi = 1;
        r.n_calls = 1;
        (void)box.tensor(start);
        r.converged = true;
        r.wall_time = detail::elapsed(t0);
        return r;
    }

    std::vector<MultiIndex> seeds{start};
    MultiIndex flipped(start);
    for (auto& s : flipped)
        s ^= 1;
    seeds.push_back(flipped);
    const auto run = tci_run(box.tensor, detail::tci_options(opts), std::span<const MultiIndex>(seeds));
    auto report = detail::finish_report(Measure::REC, psi, run, *box.cache);
    report.raw_value = -sum_all(run.tt).real();
    report.value = report.raw_value;
    report.wall_time = detail::elapsed(t0);
    return report;
}

inline ResourceReport measure(Measure m, const MatrixProductState& psi, const ResourceOptions& opts) {
    return m == Measure::SRE2 ? sre2(psi, opts) : rec(psi, opts);
}

/// Equal-weight superposition of the two uniform configurations, bond dimension 2.
inline MatrixProductState make_ghz_mps(std::size_t n_sites) {
    if (n_sites < 2)
        throw InvalidInput("make_ghz_mps: need at least two sites");
    const double w = 1.0 / std::sqrt(2.0);
    std::vector<SiteTensor> sites;
    for (std::size_t l = 0; l < n_sites; ++l) {
        const Eigen::Index left = l == 0 ? 1 : 2, right = l + 1 == n_sites ? 1 : 2;
        std::vector<Matrix> slices;
        for (Eigen::Index s = 0; s < 2; ++s) {
            Matrix m = Matrix::Zero(left, right);
            m(left == 1 ? 0 : s, right == 1 ? 0 : s) = l == 0 ? w : 1.0;
            slices.push_back(m);
        }
        sites.push_back(SiteTensor::from_slices(slices));
    }
    return MatrixProductState(std::move(sites));
}

namespace detail {

inline std::size_t qubit_count(const DenseTensor& psi, std::size_t cap) {
    for (auto extent : psi.shape())
        if (extent != 2)
            throw ShapeError("bruteforce: every leg must have dimension 2");
    if (psi.rank() > cap)
        throw ResourceLimit("bruteforce: system too large for exhaustive enumeration");
    return psi.rank();
}

} // namespace detail

/// Exhaustive sum over all 4^L Pauli strings, L <= 8.
inline double sre2_bruteforce(const DenseTensor& psi) {
    const std::size_t n = detail::qubit_count(psi, 8);
    const std::uint64_t dim = std::uint64_t{1} << n;
    const auto& c = psi.data();
    double norm2 = 0.0;
    for (const auto& z : c)
        norm2 += std::norm(z);
    double total = 0.0;
    // site i <-> bit n-1-i; each site picks one of I, X, Y, Z
    std::uint64_t strings = std::uint64_t{1} << (2 * n);
    for (std::uint64_t code = 0; code < strings; ++code) {
        std::uint64_t flip = 0, sign = 0;
        int n_y = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto p = static_cast<Pauli>((code >> (2 * i)) & 3u);
            const std::uint64_t bit = std::uint64_t{1} << (n - 1 - i);
            if (p == Pauli::X || p == Pauli::Y)
                flip |= bit;
            if (p == Pauli::Z || p == Pauli::Y)
                sign |= bit;
            n_y += p == Pauli::Y;
        }
        cplx acc = 0.0;
        for (std::uint64_t x = 0; x < dim; ++x) {
            const cplx term = std::conj(c[x]) * c[x ^ flip];
            acc += (std::popcount(x & sign) & 1) ? -term : term;
        }
        static constexpr cplx phase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
        const double e = (acc * phase[n_y & 3]).real() / norm2;
        total += e * e * e * e;
    }
    return -std::log2(total / static_cast<double>(dim));
}

/// Exhaustive diagonal entropy over all 2^L amplitudes, L <= 20.
inline double rec_bruteforce(const DenseTensor& psi) {
    detail::qubit_count(psi, 20);
    double norm2 = 0.0;
    for (const auto& z : psi.data())
        norm2 += std::norm(z);
    double total = 0.0;
    for (const auto& z : psi.data()) {
        const double p = std::norm(z) / norm2;
        if (p > 0.0)
            total -= p * std::log2(p);
    }
    return total;
}

} // namespace qres
