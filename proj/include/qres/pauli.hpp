#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qres/errors.hpp"
#include "qres/linalg.hpp"

namespace qres {

/// Single-qubit Pauli label; the numeric value is the local index used for
/// Pauli-labelled tensors (d = 4).
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Nonzero entry of row s of a Pauli matrix: P(s, s ^ flip) = coeff(s).
struct PauliAction {
    int flip;
    std::array<cplx, 2> coeff;
};

inline constexpr PauliAction pauli_action(Pauli p) {
    using namespace std::complex_literals;
    switch (p) {
    case Pauli::I: return {0, {cplx{1.0, 0.0}, cplx{1.0, 0.0}}};
    case Pauli::X: return {1, {cplx{1.0, 0.0}, cplx{1.0, 0.0}}};
    case Pauli::Y: return {1, {cplx{0.0, -1.0}, cplx{0.0, 1.0}}};
    case Pauli::Z: return {0, {cplx{1.0, 0.0}, cplx{-1.0, 0.0}}};
    }
    return {0, {cplx{}, cplx{}}};
}

inline Eigen::Matrix2cd pauli_matrix(Pauli p) {
    const auto act = pauli_action(p);
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    for (int s = 0; s < 2; ++s)
        m(s, s ^ act.flip) = act.coeff[s];
    return m;
}

inline char pauli_char(Pauli p) { return "IXYZ"[static_cast<int>(p)]; }

class PauliString {
public:
    PauliString() = default;
    explicit PauliString(std::vector<Pauli> labels) : labels_(std::move(labels)) {}

    /// Parses "IXYZ"-style text.
    static PauliString parse(std::string_view text) {
        std::vector<Pauli> labels;
        labels.reserve(text.size());
        for (char c : text) {
            switch (c) {
            case 'I': labels.push_back(Pauli::I); break;
            case 'X': labels.push_back(Pauli::X); break;
            case 'Y': labels.push_back(Pauli::Y); break;
            case 'Z': labels.push_back(Pauli::Z); break;
            default: throw InvalidInput(std::string("PauliString: unknown label '") + c + "'");
            }
        }
        return PauliString(std::move(labels));
    }

    /// Builds a string from local indices 0..3 (I, X, Y, Z).
    template <class Range>
    static PauliString from_indices(const Range& indices) {
        std::vector<Pauli> labels;
        for (auto i : indices) {
            if (i < 0 || i > 3)
                throw ShapeError("PauliString: index outside {0,1,2,3}");
            labels.push_back(static_cast<Pauli>(i));
        }
        return PauliString(std::move(labels));
    }

    static PauliString uniform(std::size_t n, Pauli p) { return PauliString(std::vector<Pauli>(n, p)); }

    std::size_t size() const noexcept { return labels_.size(); }
    Pauli operator[](std::size_t k) const { return labels_[k]; }
    const std::vector<Pauli>& labels() const noexcept { return labels_; }

    std::string str() const {
        std::string s;
        for (auto p : labels_)
            s.push_back(pauli_char(p));
        return s;
    }

    friend bool operator==(const PauliString&, const PauliString&) = default;

private:
    std::vector<Pauli> labels_;
};

} // namespace qres
