#pragma once

// Byte-string helpers shared by every module: hex codecs, big-endian
// integer packing, constant-time comparison, seed derivation.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dsekp {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(BytesView b) {
    return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, BytesView more) {
    out.insert(out.end(), more.begin(), more.end());
}

inline void append_be16(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

inline void append_be32(Bytes& out, uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

inline void append_be64(Bytes& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

std::string to_hex(BytesView data);

// Strict decoder: lowercase hex only, even length. Returns false on any
// malformed input and leaves `out` unspecified.
bool from_hex(std::string_view hex, Bytes& out);

// Fixed-size variant; fails when the decoded length differs from N.
template <size_t N>
bool from_hex(std::string_view hex, std::array<uint8_t, N>& out) {
    Bytes tmp;
    if (!from_hex(hex, tmp) || tmp.size() != N) return false;
    std::copy(tmp.begin(), tmp.end(), out.begin());
    return true;
}

// Timing-independent equality for tags and proofs.
bool constant_time_equal(BytesView a, BytesView b);

// splitmix64: cheap, well-mixed stream derivation so each component of a
// run (broker, each device, adversary) gets an independent seed from the
// profile seed.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t derive_seed(uint64_t base, uint64_t stream) {
    return splitmix64(base ^ splitmix64(stream));
}

}  // namespace dsekp
