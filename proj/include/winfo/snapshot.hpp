#pragma once

// Binary weight snapshots:
//   "WODO" | version u16 LE (=1) | dim u64 LE | dim x f32 LE

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "winfo/core.hpp"

namespace winfo {

inline constexpr std::array<char, 4> kSnapshotMagic{'W', 'O', 'D', 'O'};
inline constexpr std::uint16_t kSnapshotVersion = 1;
inline constexpr std::size_t kSnapshotHeaderSize = 4 + 2 + 8;

namespace detail {

template <class UInt>
void put_le(std::vector<unsigned char>& out, UInt v) {
    for (std::size_t b = 0; b < sizeof(UInt); ++b)
        out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xFFu));
}

template <class UInt>
UInt get_le(const unsigned char* p) {
    UInt v = 0;
    for (std::size_t b = 0; b < sizeof(UInt); ++b) v |= static_cast<UInt>(p[b]) << (8 * b);
    return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_snapshot(const WeightVector& w) {
    std::vector<unsigned char> out;
    out.reserve(kSnapshotHeaderSize + 4 * w.dim());
    for (char c : kSnapshotMagic) out.push_back(static_cast<unsigned char>(c));
    detail::put_le<std::uint16_t>(out, kSnapshotVersion);
    detail::put_le<std::uint64_t>(out, w.dim());
    for (float v : w.values()) detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
    return out;
}

/// Decodes a snapshot image. When expected_dim is given, a header with a
/// different dim is rejected.
inline WeightVector decode_snapshot(const std::vector<unsigned char>& bytes,
                                    std::optional<std::size_t> expected_dim = std::nullopt) {
    if (bytes.size() < kSnapshotMagic.size() ||
        !std::equal(kSnapshotMagic.begin(), kSnapshotMagic.end(), bytes.begin(),
                    [](char a, unsigned char b) { return static_cast<unsigned char>(a) == b; }))
        throw FormatError("bad snapshot magic");
    if (bytes.size() < kSnapshotHeaderSize) throw TruncationError("snapshot header truncated");

    const auto version = detail::get_le<std::uint16_t>(bytes.data() + 4);
    if (version != kSnapshotVersion)
        throw FormatError("unsupported snapshot version " + std::to_string(version));

    const auto dim = detail::get_le<std::uint64_t>(bytes.data() + 6);
    if (dim == 0) throw HeaderError("snapshot header declares dim 0");
    if (expected_dim && dim != *expected_dim)
        throw HeaderError("snapshot dim " + std::to_string(dim) + " does not match expected " +
                          std::to_string(*expected_dim));

    const std::size_t payload = bytes.size() - kSnapshotHeaderSize;
    if (payload / 4 < dim)
        throw TruncationError("snapshot payload holds " + std::to_string(payload / 4) +
                              " floats, header declares " + std::to_string(dim));
    if (payload != dim * 4)
        throw HeaderError("snapshot payload is longer than its header declares");

    std::vector<float> values(dim);
    const unsigned char* p = bytes.data() + kSnapshotHeaderSize;
    for (std::size_t i = 0; i < dim; ++i, p += 4)
        values[i] = std::bit_cast<float>(detail::get_le<std::uint32_t>(p));
    for (float v : values)
        if (!std::isfinite(v)) throw FormatError("snapshot contains a non-finite value");
    return WeightVector(std::move(values));
}

inline void save_snapshot(const WeightVector& w, const std::filesystem::path& path) {
    const auto bytes = encode_snapshot(w);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing " + path.string());
}

inline WeightVector load_snapshot(const std::filesystem::path& path,
                                  std::optional<std::size_t> expected_dim = std::nullopt) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_snapshot(bytes, expected_dim);
}

}  // namespace winfo
