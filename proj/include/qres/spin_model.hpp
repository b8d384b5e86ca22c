#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qres/dense_tensor.hpp"
#include "qres/errors.hpp"

namespace qres {

enum class Geometry { chain, grid };

/// Ferromagnetic transverse-field Ising model H = -J sum_<ij> Z_i Z_j - h sum_i X_i
/// on a chain or a W x H grid. Grid sites are numbered along a snake path:
/// row by row, even rows left to right, odd rows right to left.
class SpinModel {
public:
    using Bond = std::pair<std::size_t, std::size_t>;

    Geometry geometry() const noexcept { return geometry_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    bool periodic() const noexcept { return periodic_; }
    double coupling() const noexcept { return coupling_; }
    double field() const noexcept { return field_; }
    std::size_t n_sites() const noexcept { return width_ * height_; }

    /// Unordered nearest-neighbour pairs (i < j), each listed once.
    const std::vector<Bond>& bonds() const noexcept { return bonds_; }

    /// Snake index of grid cell (row, col); for chains row is 0.
    std::size_t site_of(std::size_t row, std::size_t col) const {
        if (row >= height_ || col >= width_)
            throw ShapeError("SpinModel: cell outside the lattice");
        return row * width_ + (row % 2 == 0 ? col : width_ - 1 - col);
    }

    std::pair<std::size_t, std::size_t> coords_of(std::size_t site) const {
        if (site >= n_sites())
            throw ShapeError("SpinModel: site index out of range");
        const std::size_t row = site / width_;
        const std::size_t k = site % width_;
        return {row, row % 2 == 0 ? k : width_ - 1 - k};
    }

    /// Short geometry tag, e.g. "chain8" or "grid3x4".
    std::string label() const {
        if (geometry_ == Geometry::chain)
            return "chain" + std::to_string(width_) + (periodic_ ? "" : "o");
        return "grid" + std::to_string(width_) + "x" + std::to_string(height_) + (periodic_ ? "" : "o");
    }

    SpinModel with_field(double h) const {
        SpinModel m = *this;
        m.field_ = h;
        return m;
    }

    friend SpinModel build_tfim_1d(std::size_t, double, bool);
    friend SpinModel build_tfim_2d(std::size_t, std::size_t, double, bool);

private:
    void add_bond(std::set<Bond>& seen, std::size_t a, std::size_t b) {
        if (a == b)
            return;
        Bond key{std::min(a, b), std::max(a, b)};
        if (seen.insert(key).second)
            bonds_.push_back(key);
    }

    Geometry geometry_ = Geometry::chain;
    std::size_t width_ = 0, height_ = 1;
    bool periodic_ = true;
    double coupling_ = 1.0;
    double field_ = 0.0;
    std::vector<Bond> bonds_;
};

inline SpinModel build_tfim_1d(std::size_t n_sites, double h, bool periodic) {
    if (n_sites < 2)
        throw InvalidInput("build_tfim_1d: need at least 2 sites");
    if (!(h >= 0.0))
        throw InvalidInput("build_tfim_1d: field must be nonnegative");
    SpinModel m;
    m.geometry_ = Geometry::chain;
    m.width_ = n_sites;
    m.height_ = 1;
    m.periodic_ = periodic;
    m.field_ = h;
    std::set<SpinModel::Bond> seen;
    for (std::size_t j = 0; j + 1 < n_sites; ++j)
        m.add_bond(seen, j, j + 1);
    if (periodic)
        m.add_bond(seen, n_sites - 1, 0);
    return m;
}

inline SpinModel build_tfim_2d(std::size_t width, std::size_t height, double h, bool periodic) {
    if (width < 2 || height < 2)
        throw InvalidInput("build_tfim_2d: grid must be at least 2x2");
    if (!(h >= 0.0))
        throw InvalidInput("build_tfim_2d: field must be nonnegative");
    SpinModel m;
    m.geometry_ = Geometry::grid;
    m.width_ = width;
    m.height_ = height;
    m.periodic_ = periodic;
    m.field_ = h;
    std::set<SpinModel::Bond> seen;
    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const std::size_t here = m.site_of(r, c);
            if (c + 1 < width)
                m.add_bond(seen, here, m.site_of(r, c + 1));
            else if (periodic)
                m.add_bond(seen, here, m.site_of(r, 0));
            if (r + 1 < height)
                m.add_bond(seen, here, m.site_of(r + 1, c));
            else if (periodic)
                m.add_bond(seen, here, m.site_of(0, c));
        }
    return m;
}

inline constexpr std::size_t default_site_cap = 24;

/// Matrix-free H|v> on the 2^N computational basis. Site i is the (N-1-i)-th
/// bit of the basis index (site 0 is the most significant leg), bit 0 = up.
class IsingHamiltonian {
public:
    explicit IsingHamiltonian(const SpinModel& model, std::size_t site_cap = default_site_cap)
        : n_(model.n_sites()), field_(model.field()) {
        if (n_ > site_cap || n_ > 30)
            throw ResourceLimit("IsingHamiltonian: " + std::to_string(n_) + " sites exceed the cap of " +
                                std::to_string(site_cap));
        const std::size_t dim = std::size_t{1} << n_;
        diagonal_.assign(dim, 0.0);
        for (const auto& [i, j] : model.bonds()) {
            const std::size_t mi = bit_of(i), mj = bit_of(j);
            for (std::size_t x = 0; x < dim; ++x) {
                const bool aligned = ((x & mi) != 0) == ((x & mj) != 0);
                diagonal_[x] -= model.coupling() * (aligned ? 1.0 : -1.0);
            }
        }
    }

    std::size_t n_sites() const noexcept { return n_; }
    std::size_t dim() const noexcept { return diagonal_.size(); }
    const std::vector<double>& diagonal() const noexcept { return diagonal_; }

    void apply(const cplx* in, cplx* out) const {
        const std::size_t dim = diagonal_.size();
        for (std::size_t x = 0; x < dim; ++x) {
            cplx acc = diagonal_[x] * in[x];
            for (std::size_t b = 0; b < n_; ++b)
                acc -= field_ * in[x ^ (std::size_t{1} << b)];
            out[x] = acc;
        }
    }

    Vector apply(const Vector& v) const {
        Vector out(v.size());
        apply(v.data(), out.data());
        return out;
    }

private:
    std::size_t bit_of(std::size_t site) const { return std::size_t{1} << (n_ - 1 - site); }

    std::size_t n_;
    double field_;
    std::vector<double> diagonal_;
};

inline DenseTensor apply_hamiltonian(const SpinModel& model, const DenseTensor& vec,
                                     std::size_t site_cap = default_site_cap) {
    const IsingHamiltonian ham(model, site_cap);
    if (vec.size() != ham.dim())
        throw ShapeError("apply_hamiltonian: vector length is not 2^N");
    DenseTensor out(vec.shape());
    ham.apply(vec.data().data(), out.data().data());
    return out;
}

} // namespace qres
