// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid
{
using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

inline ByteView as_bytes(std::string_view s) noexcept
{
    return {reinterpret_cast<const uint8_t*>(s.data()), s.size()};
}

inline std::string_view as_chars(ByteView b) noexcept
{
    return {reinterpret_cast<const char*>(b.data()), b.size()};
}

inline Bytes to_bytes(std::string_view s)
{
    return {s.begin(), s.end()};
}

inline uint16_t read_u16le(ByteView b, size_t pos) noexcept
{
    return static_cast<uint16_t>(b[pos] | (b[pos + 1] << 8));
}

inline uint32_t read_u32le(ByteView b, size_t pos) noexcept
{
    return static_cast<uint32_t>(b[pos]) | (static_cast<uint32_t>(b[pos + 1]) << 8) |
           (static_cast<uint32_t>(b[pos + 2]) << 16) | (static_cast<uint32_t>(b[pos + 3]) << 24);
}

inline void write_u16le(Bytes& out, uint16_t v)
{
    out.push_back(static_cast<uint8_t>(v));
    out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void write_u32le(Bytes& out, uint32_t v)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

/// Lowercase hex rendering, no separators.
std::string to_hex(ByteView b);

/// SHA-256 of the input as lowercase hex.
std::string sha256_hex(ByteView b);

inline std::string sha256_hex(std::string_view s)
{
    return sha256_hex(as_bytes(s));
}
}  // namespace wasmdroid
