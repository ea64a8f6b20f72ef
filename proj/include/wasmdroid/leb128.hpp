// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include "error.hpp"
#include <cstdint>
#include <utility>

namespace wasmdroid
{
/// Decodes an unsigned LEB128 of at most 5 bytes starting at `cursor`.
/// Returns the value and the cursor just past the encoding.
/// Throws LebOverflow for encodings longer than 5 bytes or with bits beyond 32,
/// UnexpectedEof when the input ends mid-encoding.
std::pair<uint32_t, size_t> decode_leb_u32(ByteView bytes, size_t cursor);

/// Unsigned LEB128 up to 64 bits (10 bytes).
std::pair<uint64_t, size_t> decode_leb_u64(ByteView bytes, size_t cursor);

/// Signed LEB128 of `Bits` width (32, 33 or 64).
std::pair<int64_t, size_t> decode_leb_signed(ByteView bytes, size_t cursor, unsigned bits);

void encode_leb_u32(Bytes& out, uint32_t value);
void encode_leb_u64(Bytes& out, uint64_t value);
void encode_leb_s64(Bytes& out, int64_t value);
}  // namespace wasmdroid
