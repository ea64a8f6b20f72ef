// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wasmdroid
{
inline constexpr size_t kDexHeaderSize = 0x70;

/// Header and string table of a DEX file. `raw` views the caller's buffer and
/// must not outlive it.
struct DexFile
{
    std::string version;  ///< "035", "037", ...
    uint32_t string_count = 0;
    std::vector<std::string> strings;  ///< UTF-8, U+FFFD for undecodable input
    uint32_t data_offset = 0;
    uint32_t data_size = 0;
    /// Strings that needed at least one replacement character.
    uint32_t malformed_strings = 0;
    ByteView raw;
};

/// Throws BadDexMagic or HeaderOutOfBounds.
DexFile parse_dex(ByteView bytes);

struct DexStringHit
{
    std::string token;
    uint32_t string_index = 0;

    friend bool operator==(const DexStringHit&, const DexStringHit&) = default;
};

/// Case-sensitive substring search of every token in every string, ordered
/// by string index then token order.
std::vector<DexStringHit> dex_strings_matching(
    const DexFile& dex, const std::vector<std::string>& tokens);

/// Decodes MUTF-8 (modified UTF-8 with CESU-style surrogates) to UTF-8.
/// The bool is false when any replacement character had to be inserted.
std::pair<std::string, bool> decode_mutf8(ByteView bytes);

/// Inverse of decode_mutf8 for valid UTF-8 input. Returns the encoded bytes
/// and the UTF-16 length that DEX stores in front of them.
std::pair<Bytes, uint32_t> encode_mutf8(std::string_view utf8);
}  // namespace wasmdroid
