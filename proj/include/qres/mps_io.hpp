#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>

#include "qres/errors.hpp"
#include "qres/mps.hpp"

namespace qres {

// Snapshot layout, all integers and floats little-endian:
//   8 bytes   magic "QRESMPS\0"
//   u32       format version (1)
//   u32       L, number of sites
//   u32       d, physical dimension
//   u32       canonical center, 0xFFFFFFFF when absent
//   u64 x L+1 bond dimensions bond_0 .. bond_L
//   f64 pairs site tensors in order, each row-major (left, phys, right), (re, im)
inline constexpr std::array<char, 8> snapshot_magic{'Q', 'R', 'E', 'S', 'M', 'P', 'S', '\0'};
inline constexpr std::uint32_t snapshot_version = 1;

namespace detail {

template <class UInt>
void write_le(std::ostream& out, UInt value) {
    std::array<char, sizeof(UInt)> bytes{};
    for (std::size_t k = 0; k < sizeof(UInt); ++k)
        bytes[k] = static_cast<char>((value >> (8 * k)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

template <class UInt>
UInt read_le(std::istream& in) {
    std::array<unsigned char, sizeof(UInt)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (!in)
        throw InvalidInput("MPS snapshot: truncated file");
    UInt value = 0;
    for (std::size_t k = 0; k < sizeof(UInt); ++k)
        value |= static_cast<UInt>(bytes[k]) << (8 * k);
    return value;
}

} // namespace detail

inline void write_snapshot(std::ostream& out, const MatrixProductState& psi) {
    out.write(snapshot_magic.data(), snapshot_magic.size());
    detail::write_le<std::uint32_t>(out, snapshot_version);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(psi.size()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(psi.phys_dim()));
    const auto center = psi.canonical_center();
    detail::write_le<std::uint32_t>(out, center ? static_cast<std::uint32_t>(*center) : 0xFFFFFFFFu);
    for (auto b : psi.bond_dims())
        detail::write_le<std::uint64_t>(out, b);
    for (const auto& site : psi.sites())
        for (const auto& z : site.data()) {
            detail::write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(z.real()));
            detail::write_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(z.imag()));
        }
    if (!out)
        throw Error("MPS snapshot: write failed");
}

inline MatrixProductState read_snapshot(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != snapshot_magic)
        throw InvalidInput("MPS snapshot: bad magic bytes");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != snapshot_version)
        throw InvalidInput("MPS snapshot: unsupported version " + std::to_string(version));
    const auto n_sites = detail::read_le<std::uint32_t>(in);
    const auto d = detail::read_le<std::uint32_t>(in);
    const auto center = detail::read_le<std::uint32_t>(in);
    if (n_sites == 0 || d == 0)
        throw InvalidInput("MPS snapshot: empty state");
    std::vector<std::uint64_t> bonds(n_sites + 1);
    for (auto& b : bonds) {
        b = detail::read_le<std::uint64_t>(in);
        if (b == 0 || b > (1u << 20))
            throw InvalidInput("MPS snapshot: implausible bond dimension");
    }
    std::vector<SiteTensor> sites;
    for (std::uint32_t l = 0; l < n_sites; ++l) {
        std::vector<cplx> data(bonds[l] * d * bonds[l + 1]);
        for (auto& z : data) {
            const double re = std::bit_cast<double>(detail::read_le<std::uint64_t>(in));
            const double im = std::bit_cast<double>(detail::read_le<std::uint64_t>(in));
            z = {re, im};
        }
        sites.emplace_back(bonds[l], d, bonds[l + 1], std::move(data));
    }
    std::optional<std::size_t> c;
    if (center != 0xFFFFFFFFu)
        c = center;
    return MatrixProductState(std::move(sites), c);
}

inline void save_snapshot(const std::filesystem::path& path, const MatrixProductState& psi) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("MPS snapshot: cannot open " + path.string());
    write_snapshot(out, psi);
}

inline MatrixProductState load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InvalidInput("MPS snapshot: cannot open " + path.string());
    return read_snapshot(in);
}

} // namespace qres
