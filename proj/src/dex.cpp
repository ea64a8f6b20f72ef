// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/dex.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/leb128.hpp>
#include <algorithm>
#include <optional>
#include <array>

namespace wasmdroid
{
namespace
{
constexpr std::array<std::string_view, 5> kVersions{"035", "037", "038", "039", "040"};
constexpr uint32_t kReplacement = 0xFFFD;

void append_utf8(std::string& out, uint32_t cp)
{
    if (cp < 0x80)
        out.push_back(static_cast<char>(cp));
    else if (cp < 0x800)
    {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    else if (cp < 0x10000)
    {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
    else
    {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_cont(uint8_t b)
{
    return (b & 0xC0) == 0x80;
}

/// Reads one UTF-16 unit in MUTF-8 form at `pos`; nullopt if malformed.
std::optional<std::pair<uint32_t, size_t>> read_unit(ByteView b, size_t pos)
{
    const uint8_t c = b[pos];
    if (c >= 0x01 && c < 0x80)
        return std::pair{uint32_t{c}, pos + 1};
    if ((c & 0xE0) == 0xC0 && pos + 1 < b.size() && is_cont(b[pos + 1]))
        return std::pair{((c & 0x1Fu) << 6) | (b[pos + 1] & 0x3Fu), pos + 2};
    if ((c & 0xF0) == 0xE0 && pos + 2 < b.size() && is_cont(b[pos + 1]) && is_cont(b[pos + 2]))
        return std::pair{((c & 0x0Fu) << 12) | ((b[pos + 1] & 0x3Fu) << 6) | (b[pos + 2] & 0x3Fu),
            pos + 3};
    return std::nullopt;
}

uint32_t check_list(ByteView bytes, size_t field, uint32_t item_size, std::string_view what)
{
    const uint32_t count = read_u32le(bytes, field);
    const uint32_t offset = read_u32le(bytes, field + 4);
    if (count != 0 && static_cast<uint64_t>(offset) + static_cast<uint64_t>(count) * item_size > bytes.size())
        throw Error{ErrorCode::HeaderOutOfBounds, std::string{what} + " list exceeds file"};
    return count;
}
}  // namespace

std::pair<std::string, bool> decode_mutf8(ByteView bytes)
{
    std::string out;
    out.reserve(bytes.size());
    bool clean = true;
    size_t pos = 0;
    while (pos < bytes.size())
    {
        auto unit = read_unit(bytes, pos);
        if (!unit)
        {
            append_utf8(out, kReplacement);
            clean = false;
            ++pos;
            continue;
        }
        auto [cp, next] = *unit;
        if (cp >= 0xD800 && cp <= 0xDBFF)
        {
            const auto low = next < bytes.size() ? read_unit(bytes, next) : std::nullopt;
            if (low && low->first >= 0xDC00 && low->first <= 0xDFFF)
            {
                cp = 0x10000 + ((cp - 0xD800) << 10) + (low->first - 0xDC00);
                next = low->second;
            }
            else
            {
                cp = kReplacement;
                clean = false;
            }
        }
        else if (cp >= 0xDC00 && cp <= 0xDFFF)
        {
            cp = kReplacement;
            clean = false;
        }
        append_utf8(out, cp);
        pos = next;
    }
    return {std::move(out), clean};
}

std::pair<Bytes, uint32_t> encode_mutf8(std::string_view utf8)
{
    Bytes out;
    uint32_t units = 0;
    auto put3 = [&](uint32_t u) {
        out.push_back(static_cast<uint8_t>(0xE0 | (u >> 12)));
        out.push_back(static_cast<uint8_t>(0x80 | ((u >> 6) & 0x3F)));
        out.push_back(static_cast<uint8_t>(0x80 | (u & 0x3F)));
    };
    const auto b = as_bytes(utf8);
    size_t pos = 0;
    while (pos < b.size())
    {
        const uint8_t c = b[pos];
        uint32_t cp = kReplacement;
        size_t len = 1;
        if (c < 0x80)
            cp = c;
        else if ((c & 0xE0) == 0xC0 && pos + 1 < b.size())
            cp = ((c & 0x1Fu) << 6) | (b[pos + 1] & 0x3Fu), len = 2;
        else if ((c & 0xF0) == 0xE0 && pos + 2 < b.size())
            cp = ((c & 0x0Fu) << 12) | ((b[pos + 1] & 0x3Fu) << 6) | (b[pos + 2] & 0x3Fu), len = 3;
        else if ((c & 0xF8) == 0xF0 && pos + 3 < b.size())
            cp = ((c & 0x07u) << 18) | ((b[pos + 1] & 0x3Fu) << 12) | ((b[pos + 2] & 0x3Fu) << 6) |
                 (b[pos + 3] & 0x3Fu),
            len = 4;
        pos += len;

        if (cp == 0)
        {
            out.push_back(0xC0);
            out.push_back(0x80);
            ++units;
        }
        else if (cp < 0x80)
        {
            out.push_back(static_cast<uint8_t>(cp));
            ++units;
        }
        else if (cp < 0x800)
        {
            out.push_back(static_cast<uint8_t>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<uint8_t>(0x80 | (cp & 0x3F)));
            ++units;
        }
        else if (cp < 0x10000)
        {
            put3(cp);
            ++units;
        }
        else
        {
            const uint32_t v = cp - 0x10000;
            put3(0xD800 + (v >> 10));
            put3(0xDC00 + (v & 0x3FF));
            units += 2;
        }
    }
    return {std::move(out), units};
}

DexFile parse_dex(ByteView bytes)
{
    if (bytes.size() < 8 || bytes[0] != 'd' || bytes[1] != 'e' || bytes[2] != 'x' || bytes[3] != '\n' ||
        bytes[7] != 0)
        throw Error{ErrorCode::BadDexMagic, "missing dex\\n magic"};
    const std::string version{reinterpret_cast<const char*>(bytes.data() + 4), 3};
    if (std::find(kVersions.begin(), kVersions.end(), version) == kVersions.end())
        throw Error{ErrorCode::BadDexMagic, "unsupported dex version " + version};
    if (bytes.size() < kDexHeaderSize)
        throw Error{ErrorCode::HeaderOutOfBounds, "file shorter than the dex header"};

    DexFile dex;
    dex.version = version;
    dex.raw = bytes;
    dex.string_count = check_list(bytes, 0x38, 4, "string_ids");
    check_list(bytes, 0x40, 4, "type_ids");
    check_list(bytes, 0x48, 12, "proto_ids");
    check_list(bytes, 0x50, 8, "field_ids");
    check_list(bytes, 0x58, 8, "method_ids");
    check_list(bytes, 0x60, 32, "class_defs");
    dex.data_size = read_u32le(bytes, 0x68);
    dex.data_offset = read_u32le(bytes, 0x6C);
    if (static_cast<uint64_t>(dex.data_offset) + dex.data_size > bytes.size())
        throw Error{ErrorCode::HeaderOutOfBounds, "data section exceeds file"};

    const uint32_t ids_off = read_u32le(bytes, 0x3C);
    dex.strings.reserve(dex.string_count);
    for (uint32_t i = 0; i < dex.string_count; ++i)
    {
        const uint32_t data_off = read_u32le(bytes, ids_off + 4 * static_cast<size_t>(i));
        std::string text;
        bool clean = false;
        if (data_off < bytes.size())
        {
            try
            {
                const auto [utf16_len, start] = decode_leb_u32(bytes, data_off);
                (void)utf16_len;
                const auto rest = bytes.subspan(start);
                const auto nul = std::find(rest.begin(), rest.end(), uint8_t{0});
                std::tie(text, clean) = decode_mutf8(rest.first(static_cast<size_t>(nul - rest.begin())));
                if (nul == rest.end())
                    clean = false;
            }
            catch (const Error&)
            {
                clean = false;
            }
        }
        if (!clean)
        {
            ++dex.malformed_strings;
            if (text.empty())
                append_utf8(text, kReplacement);
        }
        dex.strings.push_back(std::move(text));
    }
    return dex;
}

std::vector<DexStringHit> dex_strings_matching(const DexFile& dex, const std::vector<std::string>& tokens)
{
    std::vector<DexStringHit> hits;
    for (uint32_t i = 0; i < dex.strings.size(); ++i)
    {
        for (const auto& token : tokens)
        {
            if (!token.empty() && dex.strings[i].find(token) != std::string::npos)
                hits.push_back({token, i});
        }
    }
    return hits;
}
}  // namespace wasmdroid
