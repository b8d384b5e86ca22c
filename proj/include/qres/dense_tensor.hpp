#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qres/errors.hpp"
#include "qres/linalg.hpp"

namespace qres {

/// Complex tensor stored in row-major order (last index fastest).
class DenseTensor {
public:
    DenseTensor() = default;

    explicit DenseTensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(element_count(shape_), cplx{0.0, 0.0}) {}

    DenseTensor(std::vector<std::size_t> shape, std::vector<cplx> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (element_count(shape_) != data_.size())
            throw ShapeError("DenseTensor: shape does not match data length");
    }

    /// Tensor of L legs of dimension d.
    static DenseTensor state(std::size_t n_sites, std::size_t d, std::vector<cplx> data) {
        return DenseTensor(std::vector<std::size_t>(n_sites, d), std::move(data));
    }

    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> data() noexcept { return data_; }

    cplx& operator[](std::size_t flat) { return data_[flat]; }
    const cplx& operator[](std::size_t flat) const { return data_[flat]; }

    /// Row-major offset of a multi-index.
    std::size_t offset(std::span<const std::size_t> index) const {
        if (index.size() != shape_.size())
            throw ShapeError("DenseTensor: index has wrong number of legs");
        std::size_t flat = 0;
        for (std::size_t k = 0; k < index.size(); ++k) {
            if (index[k] >= shape_[k])
                throw ShapeError("DenseTensor: index out of range");
            flat = flat * shape_[k] + index[k];
        }
        return flat;
    }

    const cplx& at(std::span<const std::size_t> index) const { return data_[offset(index)]; }
    cplx& at(std::span<const std::size_t> index) { return data_[offset(index)]; }

    DenseTensor reshaped(std::vector<std::size_t> shape) const {
        if (element_count(shape) != data_.size())
            throw ShapeError("DenseTensor: reshape changes element count");
        return DenseTensor(std::move(shape), data_);
    }

    double norm() const {
        double acc = 0.0;
        for (const auto& z : data_)
            acc += std::norm(z);
        return std::sqrt(acc);
    }

    Eigen::Map<const Vector> as_vector() const {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }
    Eigen::Map<Vector> as_vector() {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }

private:
    static std::size_t element_count(const std::vector<std::size_t>& shape) {
        for (auto n : shape)
            if (n == 0)
                throw ShapeError("DenseTensor: zero-sized leg");
        return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
    }

    std::vector<std::size_t> shape_;
    std::vector<cplx> data_;
};

} // namespace qres
