// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/container.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/wasm.hpp>
#include <zlib.h>
#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <map>

namespace wasmdroid
{
namespace
{
constexpr uint32_t kEocdSignature = 0x06054b50;
constexpr uint32_t kZip64LocatorSignature = 0x07064b50;
constexpr uint32_t kCentralSignature = 0x02014b50;
constexpr uint32_t kLocalSignature = 0x04034b50;
constexpr size_t kEocdSize = 22;
constexpr size_t kCentralHeaderSize = 46;
constexpr size_t kLocalHeaderSize = 30;
constexpr size_t kMaxCommentSize = 0xFFFF;
constexpr size_t kHeadSize = 16;

struct DataRange
{
    size_t start = 0;
    size_t size = 0;
};

DataRange data_range(ByteView src, const ArchiveEntry& e)
{
    const size_t local = e.offset;
    if (local + kLocalHeaderSize > src.size())
        throw Error{ErrorCode::TruncatedArchive, "local header of '" + e.path + "' past end"};
    if (read_u32le(src, local) != kLocalSignature)
        throw Error{ErrorCode::TruncatedArchive, "bad local header signature for '" + e.path + "'"};
    const size_t name_len = read_u16le(src, local + 26);
    const size_t extra_len = read_u16le(src, local + 28);
    const size_t start = local + kLocalHeaderSize + name_len + extra_len;
    if (start > src.size() || src.size() - start < e.compressed_size)
        throw Error{ErrorCode::TruncatedArchive, "data of '" + e.path + "' runs past end"};
    return {start, e.compressed_size};
}

/// Sequential reader over one entry's decompressed bytes.
class EntryReader
{
public:
    EntryReader(ByteView src, const ArchiveEntry& e) : m_entry{e}
    {
        if (e.method != kMethodStored && e.method != kMethodDeflate)
            throw Error{ErrorCode::UnsupportedCompression,
                "method " + std::to_string(e.method) + " for '" + e.path + "'"};
        const auto range = data_range(src, e);
        m_input = src.subspan(range.start, range.size);
        if (e.method == kMethodDeflate)
        {
            if (inflateInit2(&m_zs, -MAX_WBITS) != Z_OK)
                throw Error{ErrorCode::UnsupportedCompression, "inflateInit failed"};
            m_inflating = true;
            m_zs.next_in = const_cast<Bytef*>(m_input.data());
            m_zs.avail_in = static_cast<uInt>(m_input.size());
        }
    }

    ~EntryReader()
    {
        if (m_inflating)
            inflateEnd(&m_zs);
    }

    EntryReader(const EntryReader&) = delete;
    EntryReader& operator=(const EntryReader&) = delete;

    /// Appends up to `n` bytes to `out`; returns the number appended. Zero
    /// means the entry is exhausted (or its stream is corrupt).
    size_t read(Bytes& out, size_t n)
    {
        if (m_done)
            return 0;
        const uint64_t declared = m_entry.uncompressed_size;
        if (m_produced >= declared && m_entry.method == kMethodDeflate)
        {
            m_done = true;
            return 0;
        }
        size_t got = 0;
        if (m_entry.method == kMethodStored)
        {
            const size_t avail = m_input.size() - m_pos;
            got = std::min(n, avail);
            out.insert(out.end(), m_input.begin() + m_pos, m_input.begin() + m_pos + got);
            m_pos += got;
            if (m_pos == m_input.size())
                m_done = true;
        }
        else
        {
            const size_t want = static_cast<size_t>(std::min<uint64_t>(n, declared - m_produced));
            const size_t old = out.size();
            out.resize(old + want);
            m_zs.next_out = out.data() + old;
            m_zs.avail_out = static_cast<uInt>(want);
            while (m_zs.avail_out > 0)
            {
                const int rc = inflate(&m_zs, Z_NO_FLUSH);
                if (rc == Z_STREAM_END)
                {
                    m_done = true;
                    break;
                }
                if (rc != Z_OK)
                {
                    m_corrupt = true;
                    m_done = true;
                    break;
                }
            }
            got = want - m_zs.avail_out;
            out.resize(old + got);
        }
        m_crc = crc32(m_crc, out.data() + out.size() - got, static_cast<uInt>(got));
        m_produced += got;
        return got;
    }

    bool crc_ok() const noexcept
    {
        return !m_corrupt && m_produced == m_entry.uncompressed_size && m_crc == m_entry.crc32;
    }

private:
    const ArchiveEntry& m_entry;
    ByteView m_input;
    size_t m_pos = 0;
    z_stream m_zs{};
    bool m_inflating = false;
    bool m_done = false;
    bool m_corrupt = false;
    uint64_t m_produced = 0;
    uLong m_crc = crc32(0, nullptr, 0);
};

std::string lower(std::string_view s)
{
    std::string out{s};
    std::transform(out.begin(), out.end(), out.begin(),
        [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool ends_with(std::string_view s, std::string_view suffix)
{
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool starts_with_bytes(ByteView head, std::initializer_list<uint8_t> prefix)
{
    return head.size() >= prefix.size() && std::equal(prefix.begin(), prefix.end(), head.begin());
}

size_t find_eocd(ByteView b)
{
    if (b.size() < kEocdSize)
        throw Error{ErrorCode::NotAZip, "input shorter than an end-of-central-directory record"};
    const size_t lowest = b.size() - kEocdSize > kMaxCommentSize ? b.size() - kEocdSize - kMaxCommentSize : 0;
    for (size_t pos = b.size() - kEocdSize + 1; pos-- > lowest;)
    {
        if (read_u32le(b, pos) == kEocdSignature)
            return pos;
    }
    throw Error{ErrorCode::NotAZip, "no end-of-central-directory record"};
}
}  // namespace

std::string_view to_string(FileClass c) noexcept
{
    switch (c)
    {
    case FileClass::Manifest:
        return "Manifest";
    case FileClass::Dex:
        return "Dex";
    case FileClass::NativeLib:
        return "NativeLib";
    case FileClass::Asset:
        return "Asset";
    case FileClass::HtmlJs:
        return "HtmlJs";
    case FileClass::WasmFile:
        return "WasmFile";
    case FileClass::Resource:
        return "Resource";
    case FileClass::Other:
        return "Other";
    case FileClass::UnsupportedCompression:
        return "UnsupportedCompression";
    }
    return "Other";
}

std::optional<FileClass> file_class_from_string(std::string_view s) noexcept
{
    for (const auto c : {FileClass::Manifest, FileClass::Dex, FileClass::NativeLib, FileClass::Asset,
             FileClass::HtmlJs, FileClass::WasmFile, FileClass::Resource, FileClass::Other,
             FileClass::UnsupportedCompression})
    {
        if (to_string(c) == s)
            return c;
    }
    return std::nullopt;
}

FileClass classify_entry(std::string_view path, ByteView head)
{
    const auto p = lower(path);
    if (starts_with_bytes(head, {0x00, 0x61, 0x73, 0x6D}) || ends_with(p, ".wasm"))
        return FileClass::WasmFile;
    if (starts_with_bytes(head, {'d', 'e', 'x', '\n'}))
        return FileClass::Dex;
    if (path == "AndroidManifest.xml")
        return FileClass::Manifest;
    if (ends_with(p, ".dex"))
        return FileClass::Dex;
    if (ends_with(p, ".so") || starts_with_bytes(head, {0x7F, 'E', 'L', 'F'}))
        return FileClass::NativeLib;
    if (ends_with(p, ".html") || ends_with(p, ".htm") || ends_with(p, ".js") || ends_with(p, ".mjs"))
        return FileClass::HtmlJs;
    if (p.starts_with("assets/"))
        return FileClass::Asset;
    if (p.starts_with("res/") || p == "resources.arsc")
        return FileClass::Resource;
    return FileClass::Other;
}

std::optional<size_t> ApkInventory::find(std::string_view path, uint32_t occurrence) const
{
    for (size_t i = 0; i < m_entries.size(); ++i)
    {
        if (m_entries[i].path == path && m_entries[i].occurrence == occurrence)
            return i;
    }
    return std::nullopt;
}

ApkInventory open_archive(Bytes bytes)
{
    ApkInventory inv;
    inv.m_source = std::make_shared<const Bytes>(std::move(bytes));
    const ByteView src = *inv.m_source;

    const size_t eocd = find_eocd(src);
    const uint16_t total = read_u16le(src, eocd + 10);
    const uint32_t cd_size = read_u32le(src, eocd + 12);
    const uint32_t cd_offset = read_u32le(src, eocd + 16);
    if (total == 0xFFFF || cd_size == 0xFFFFFFFF || cd_offset == 0xFFFFFFFF ||
        (eocd >= 20 && read_u32le(src, eocd - 20) == kZip64LocatorSignature))
        throw Error{ErrorCode::TruncatedArchive, "ZIP64 archives are not supported"};
    if (static_cast<uint64_t>(cd_offset) + cd_size > eocd)
        throw Error{ErrorCode::TruncatedArchive, "central directory extends past its end record"};

    std::map<std::string, uint32_t> seen;
    size_t pos = cd_offset;
    const size_t cd_end = static_cast<size_t>(cd_offset) + cd_size;
    for (uint16_t i = 0; i < total; ++i)
    {
        if (pos + kCentralHeaderSize > cd_end)
            throw Error{ErrorCode::TruncatedArchive, "central directory record " + std::to_string(i) + " past end"};
        if (read_u32le(src, pos) != kCentralSignature)
            throw Error{ErrorCode::TruncatedArchive, "bad central directory signature at record " + std::to_string(i)};
        const size_t name_len = read_u16le(src, pos + 28);
        const size_t extra_len = read_u16le(src, pos + 30);
        const size_t comment_len = read_u16le(src, pos + 32);
        const size_t record_len = kCentralHeaderSize + name_len + extra_len + comment_len;
        if (pos + record_len > cd_end)
            throw Error{ErrorCode::TruncatedArchive, "central directory record " + std::to_string(i) + " past end"};

        ArchiveEntry e;
        e.method = read_u16le(src, pos + 10);
        e.crc32 = read_u32le(src, pos + 16);
        e.compressed_size = read_u32le(src, pos + 20);
        e.uncompressed_size = read_u32le(src, pos + 24);
        e.offset = read_u32le(src, pos + 42);
        e.path.assign(reinterpret_cast<const char*>(src.data() + pos + kCentralHeaderSize), name_len);
        pos += record_len;

        if (e.path.empty())
        {
            inv.m_warnings.push_back("skipped central directory record " + std::to_string(i) + " with empty name");
            continue;
        }
        if (static_cast<uint64_t>(e.offset) + kLocalHeaderSize > src.size())
            throw Error{ErrorCode::TruncatedArchive, "local header of '" + e.path + "' past end"};

        e.occurrence = seen[e.path]++;
        if (e.occurrence == 1)
            inv.m_duplicates.push_back(e.path);

        FileClass cls = FileClass::UnsupportedCompression;
        if (e.method == kMethodStored || e.method == kMethodDeflate)
        {
            Bytes head;
            try
            {
                EntryReader reader{src, e};
                while (head.size() < kHeadSize && reader.read(head, kHeadSize - head.size()) > 0)
                {}
            }
            catch (const Error& err)
            {
                inv.m_warnings.push_back("cannot read head of '" + e.path + "': " + err.what());
            }
            cls = classify_entry(e.path, head);
        }
        inv.m_entries.push_back(std::move(e));
        inv.m_classes.push_back(cls);
    }
    return inv;
}

EntryPayload entry_bytes(const ApkInventory& inv, size_t entry_index)
{
    if (entry_index >= inv.entries().size())
        throw Error{ErrorCode::NoSuchEntry, "entry index " + std::to_string(entry_index)};
    const auto& e = inv.entries()[entry_index];
    EntryReader reader{inv.source(), e};
    EntryPayload payload;
    payload.bytes.reserve(std::min<size_t>(e.uncompressed_size, 64u << 20));
    while (reader.read(payload.bytes, 1u << 20) > 0)
    {}
    payload.crc_ok = reader.crc_ok();
    return payload;
}

EntryPayload entry_bytes(const ApkInventory& inv, std::string_view path, uint32_t occurrence)
{
    const auto index = inv.find(path, occurrence);
    if (!index)
        throw Error{ErrorCode::NoSuchEntry,
            "'" + std::string{path} + "' occurrence " + std::to_string(occurrence)};
    return entry_bytes(inv, *index);
}

void for_each_window(const ApkInventory& inv, size_t entry_index, size_t window, size_t lookahead,
    const WindowVisitor& visit)
{
    if (entry_index >= inv.entries().size())
        throw Error{ErrorCode::NoSuchEntry, "entry index " + std::to_string(entry_index)};
    window = std::max<size_t>(window, 1);
    EntryReader reader{inv.source(), inv.entries()[entry_index]};
    Bytes buffer;
    uint64_t base = 0;
    bool exhausted = false;
    while (true)
    {
        while (!exhausted && buffer.size() < window + lookahead)
        {
            if (reader.read(buffer, window + lookahead - buffer.size()) == 0)
                exhausted = true;
        }
        const size_t primary = std::min(window, buffer.size());
        if (primary == 0)
            return;
        visit(buffer, base, primary);
        if (exhausted && buffer.size() <= window)
            return;
        buffer.erase(buffer.begin(), buffer.begin() + static_cast<ptrdiff_t>(primary));
        base += primary;
    }
}
}  // namespace wasmdroid
