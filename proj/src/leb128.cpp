// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/leb128.hpp>

namespace wasmdroid
{
namespace
{
template <typename T>
std::pair<T, size_t> decode_unsigned(ByteView bytes, size_t cursor, unsigned bits)
{
    const unsigned max_bytes = (bits + 6) / 7;
    T result = 0;
    unsigned shift = 0;
    for (unsigned i = 0; i < max_bytes; ++i)
    {
        if (cursor >= bytes.size())
            throw Error{ErrorCode::UnexpectedEof, "LEB128 runs past end of input"};
        const uint8_t byte = bytes[cursor++];
        const T payload = byte & 0x7F;
        if (i == max_bytes - 1)
        {
            // Final byte: only the bits that still fit may be set.
            const unsigned remaining = bits - shift;
            if ((byte & 0x80) != 0 || (payload >> remaining) != 0)
                throw Error{ErrorCode::LebOverflow, "LEB128 exceeds " + std::to_string(bits) + " bits"};
        }
        result |= payload << shift;
        if ((byte & 0x80) == 0)
            return {result, cursor};
        shift += 7;
    }
    throw Error{ErrorCode::LebOverflow, "LEB128 too long"};
}
}  // namespace

std::pair<uint32_t, size_t> decode_leb_u32(ByteView bytes, size_t cursor)
{
    return decode_unsigned<uint32_t>(bytes, cursor, 32);
}

std::pair<uint64_t, size_t> decode_leb_u64(ByteView bytes, size_t cursor)
{
    return decode_unsigned<uint64_t>(bytes, cursor, 64);
}

std::pair<int64_t, size_t> decode_leb_signed(ByteView bytes, size_t cursor, unsigned bits)
{
    const unsigned max_bytes = (bits + 6) / 7;
    uint64_t result = 0;
    unsigned shift = 0;
    for (unsigned i = 0; i < max_bytes; ++i)
    {
        if (cursor >= bytes.size())
            throw Error{ErrorCode::UnexpectedEof, "LEB128 runs past end of input"};
        const uint8_t byte = bytes[cursor++];
        if (shift < 64)
            result |= static_cast<uint64_t>(byte & 0x7F) << shift;
        shift += 7;
        if ((byte & 0x80) == 0)
        {
            if (shift < 64 && (byte & 0x40) != 0)
                result |= ~uint64_t{0} << shift;
            return {static_cast<int64_t>(result), cursor};
        }
    }
    throw Error{ErrorCode::LebOverflow, "signed LEB128 too long"};
}

void encode_leb_u32(Bytes& out, uint32_t value)
{
    encode_leb_u64(out, value);
}

void encode_leb_u64(Bytes& out, uint64_t value)
{
    do
    {
        uint8_t byte = value & 0x7F;
        value >>= 7;
        if (value != 0)
            byte |= 0x80;
        out.push_back(byte);
    } while (value != 0);
}

void encode_leb_s64(Bytes& out, int64_t value)
{
    bool more = true;
    while (more)
    {
        uint8_t byte = value & 0x7F;
        value >>= 7;
        if ((value == 0 && (byte & 0x40) == 0) || (value == -1 && (byte & 0x40) != 0))
            more = false;
        else
            byte |= 0x80;
        out.push_back(byte);
    }
}
}  // namespace wasmdroid
