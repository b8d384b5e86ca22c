#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>

#include "qres/linalg.hpp"

namespace qres {

/// Memo of partial contractions for black boxes that evaluate a chain
/// contraction E_0 -> step(site 0) -> ... and combine a left and a right
/// environment. Left environments are keyed by index prefixes, right ones by
/// index suffixes (with their start site). Insertion stops once the byte budget
/// is spent; nothing is evicted.
class PrefixCache {
public:
    using Step = std::function<Matrix(std::size_t site, int index, const Matrix& env)>;
    using Combine = std::function<cplx(const Matrix& left, const Matrix& right)>;

    static constexpr std::size_t default_capacity_bytes = std::size_t{1} << 28;

    PrefixCache(std::size_t length, Step left_step, Step right_step, Combine combine,
                std::size_t capacity_bytes = default_capacity_bytes, bool enabled = true)
        : length_(length), left_step_(std::move(left_step)), right_step_(std::move(right_step)),
          combine_(std::move(combine)), capacity_(capacity_bytes), enabled_(enabled) {}

    /// Full contraction for one multi-index of the chain length.
    cplx evaluate(std::span<const int> index) {
        const std::size_t n = length_;
        std::size_t a = 0, s = n;
        Matrix left = Matrix::Ones(1, 1), right = Matrix::Ones(1, 1);
        if (enabled_) {
            std::lock_guard lock(mutex_);
            for (std::size_t k = n; k > 0; --k)
                if (auto it = left_.find(key(index, 0, k)); it != left_.end()) {
                    a = k;
                    left = it->second;
                    break;
                }
            for (std::size_t k = a; k < n; ++k)
                if (auto it = right_.find(key(index, k, n)); it != right_.end()) {
                    s = k;
                    right = it->second;
                    break;
                }
            reused_ += a + (n - s);
            computed_ += s - a;
            hits_ += (a > 0) + (s < n);
            misses_ += (a == 0) + (s == n);
        }
        const std::size_t mid = a + (s - a) / 2;
        for (std::size_t l = a; l < mid; ++l) {
            left = left_step_(l, index[l], left);
            store(left_, key(index, 0, l + 1), left);
        }
        for (std::size_t l = s; l-- > mid;) {
            right = right_step_(l, index[l], right);
            store(right_, key(index, l, n), right);
        }
        return combine_(left, right);
    }

    /// Left environment after the first `len` indices, from the cache when present.
    Matrix left_environment(std::span<const int> index, std::size_t len) const {
        if (enabled_) {
            std::lock_guard lock(mutex_);
            if (auto it = left_.find(key(index, 0, len)); it != left_.end())
                return it->second;
        }
        Matrix env = Matrix::Ones(1, 1);
        for (std::size_t l = 0; l < len; ++l)
            env = left_step_(l, index[l], env);
        return env;
    }

    /// Same contraction without consulting the cache.
    Matrix fresh_left_environment(std::span<const int> index, std::size_t len) const {
        Matrix env = Matrix::Ones(1, 1);
        for (std::size_t l = 0; l < len; ++l)
            env = left_step_(l, index[l], env);
        return env;
    }

    std::uint64_t hits() const { return hits_; }
    std::uint64_t misses() const { return misses_; }
    std::size_t stored_entries() const { return left_.size() + right_.size(); }
    std::size_t stored_bytes() const { return bytes_; }
    bool enabled() const { return enabled_; }

    /// Fraction of site contractions served from stored environments.
    double hit_rate() const {
        const auto total = reused_ + computed_;
        return total == 0 ? 0.0 : static_cast<double>(reused_) / static_cast<double>(total);
    }

private:
    static std::string key(std::span<const int> index, std::size_t from, std::size_t to) {
        std::string k;
        k.reserve(to - from + 1);
        k.push_back(static_cast<char>(from));
        for (std::size_t l = from; l < to; ++l)
            k.push_back(static_cast<char>(index[l]));
        return k;
    }

    void store(std::unordered_map<std::string, Matrix>& map, std::string k, const Matrix& env) {
        if (!enabled_)
            return;
        const std::size_t bytes = static_cast<std::size_t>(env.size()) * sizeof(cplx) + k.size();
        std::lock_guard lock(mutex_);
        if (bytes_ + bytes > capacity_)
            return;
        if (map.emplace(std::move(k), env).second)
            bytes_ += bytes;
    }

    std::size_t length_;
    Step left_step_, right_step_;
    Combine combine_;
    std::size_t capacity_;
    bool enabled_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Matrix> left_, right_;
    std::size_t bytes_ = 0;
    std::uint64_t hits_ = 0, misses_ = 0, reused_ = 0, computed_ = 0;
};

} // namespace qres
