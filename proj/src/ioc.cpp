// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "tsv.hpp"
#include <wasmdroid/data.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/ioc.hpp>
#include <boost/regex.hpp>
#include <algorithm>

namespace wasmdroid
{
std::string_view to_string(StringOrigin o) noexcept
{
    switch (o)
    {
    case StringOrigin::DataSegment:
        return "DataSegment";
    case StringOrigin::WholeBinary:
        return "WholeBinary";
    case StringOrigin::CustomSection:
        return "CustomSection";
    }
    return "?";
}

namespace
{
/// Length in bytes of the printable character at `i`, 0 if not printable.
size_t printable_at(ByteView b, size_t i) noexcept
{
    const uint8_t c = b[i];
    if (c >= 0x20 && c < 0x7F)
        return 1;
    size_t len = 0;
    uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0)
        len = 2, cp = c & 0x1F;
    else if ((c & 0xF0) == 0xE0)
        len = 3, cp = c & 0x0F;
    else if ((c & 0xF8) == 0xF0)
        len = 4, cp = c & 0x07;
    else
        return 0;
    if (i + len > b.size())
        return 0;
    for (size_t k = 1; k < len; ++k)
    {
        if ((b[i + k] & 0xC0) != 0x80)
            return 0;
        cp = (cp << 6) | (b[i + k] & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF) || cp < 0xA0)
        return 0;
    return len;
}
}  // namespace

std::vector<ExtractedString> printable_runs(ByteView bytes, size_t min_len, StringSource base)
{
    std::vector<ExtractedString> out;
    size_t i = 0;
    while (i < bytes.size())
    {
        const size_t start = i;
        size_t chars = 0;
        while (i < bytes.size())
        {
            const auto n = printable_at(bytes, i);
            if (n == 0)
                break;
            i += n;
            ++chars;
        }
        if (chars > 0 && chars >= min_len)
        {
            ExtractedString s;
            s.text.assign(as_chars(bytes.subspan(start, i - start)));
            s.length = chars;
            s.source = base;
            s.source.offset = base.offset + start;
            if (base.memory_addr)
                s.source.memory_addr = *base.memory_addr + start;
            out.push_back(std::move(s));
        }
        if (i == start)
            ++i;
    }
    return out;
}

std::vector<ExtractedString> extract_strings(const WasmModule& m, size_t min_len, ExtractMode mode, ByteView raw)
{
    std::vector<ExtractedString> out;
    std::vector<std::pair<size_t, size_t>> covered;
    for (uint32_t i = 0; i < m.data.size(); ++i)
    {
        const auto& seg = m.data[i];
        StringSource src;
        src.origin = StringOrigin::DataSegment;
        src.segment = i;
        src.offset = 0;
        if (seg.resolved_offset)
            src.memory_addr = *seg.resolved_offset;
        for (auto& s : printable_runs(seg.bytes, min_len, src))
            out.push_back(std::move(s));
        covered.emplace_back(seg.file_offset, seg.file_offset + seg.bytes.size());
    }
    for (const auto& c : m.customs)
    {
        StringSource src;
        src.origin = StringOrigin::CustomSection;
        src.section = c.name;
        for (auto& s : printable_runs(c.bytes, min_len, src))
            out.push_back(std::move(s));
        covered.emplace_back(c.file_offset, c.file_offset + c.bytes.size());
    }
    if (mode == ExtractMode::WholeBinary && !raw.empty())
    {
        const auto span = raw.first(std::min(raw.size(), m.consumed));
        for (auto& s : printable_runs(span, min_len, StringSource{}))
        {
            // Runs identical to a segment or custom-section run are already listed.
            const auto b = s.source.offset;
            const auto e = b + s.text.size();
            const bool inside = std::any_of(covered.begin(), covered.end(),
                [&](const auto& r) { return b >= r.first && e <= r.second; });
            if (!inside)
                out.push_back(std::move(s));
        }
    }
    return out;
}

std::string_view to_string(IocKind k) noexcept
{
    switch (k)
    {
    case IocKind::Url:
        return "Url";
    case IocKind::PreopenMapping:
        return "PreopenMapping";
    case IocKind::Ipv4:
        return "Ipv4";
    case IocKind::Domain:
        return "Domain";
    case IocKind::UnixPath:
        return "UnixPath";
    }
    return "?";
}

std::optional<IocKind> ioc_kind_from_string(std::string_view s) noexcept
{
    for (const auto k : {IocKind::Url, IocKind::PreopenMapping, IocKind::Ipv4, IocKind::Domain, IocKind::UnixPath})
    {
        if (to_string(k) == s)
            return k;
    }
    return std::nullopt;
}

struct IocPatternSet::Impl
{
    struct Pattern
    {
        IocKind kind;
        std::string source;
        boost::regex re;
    };
    std::vector<Pattern> patterns;
};

IocPatternSet::IocPatternSet() : m_impl{std::make_unique<Impl>()} {}
IocPatternSet::~IocPatternSet() = default;
IocPatternSet::IocPatternSet(IocPatternSet&&) noexcept = default;
IocPatternSet& IocPatternSet::operator=(IocPatternSet&&) noexcept = default;

IocPatternSet IocPatternSet::parse(std::string_view text)
{
    IocPatternSet set;
    for (const auto& row : detail::read_tsv(text))
    {
        const auto where = "IoC pattern line " + std::to_string(row.number);
        if (row.fields.size() != 2 || row.fields[1].empty())
            throw Error{ErrorCode::CatalogError, where + ": expected kind<TAB>regex"};
        const auto kind = ioc_kind_from_string(row.fields[0]);
        if (!kind)
            throw Error{ErrorCode::CatalogError, where + ": unknown kind '" + std::string{row.fields[0]} + "'"};
        std::string source{row.fields[1]};
        try
        {
            set.m_impl->patterns.push_back({*kind, source, boost::regex{source, boost::regex::perl}});
        }
        catch (const boost::regex_error& e)
        {
            throw Error{ErrorCode::CatalogError, where + ": " + e.what()};
        }
    }
    set.m_digest = sha256_hex(text);
    return set;
}

const IocPatternSet& IocPatternSet::builtin()
{
    static const IocPatternSet set = parse(builtin_data::ioc_patterns_tsv());
    return set;
}

std::vector<IocHit> IocPatternSet::match(const ExtractedString& s) const
{
    struct Accepted
    {
        size_t begin;
        size_t end;
        IocKind kind;
    };
    std::vector<Accepted> accepted;
    const auto& text = s.text;
    for (const auto& p : m_impl->patterns)
    {
        try
        {
            for (boost::sregex_iterator it{text.begin(), text.end(), p.re}, end; it != end; ++it)
            {
                const auto& mt = (*it)[0];
                const auto b = static_cast<size_t>(mt.first - text.begin());
                const auto e = static_cast<size_t>(mt.second - text.begin());
                if (b == e)
                    continue;
                const bool overlaps = std::any_of(accepted.begin(), accepted.end(),
                    [&](const Accepted& a) { return b < a.end && a.begin < e; });
                if (!overlaps)
                    accepted.push_back({b, e, p.kind});
            }
        }
        catch (const std::runtime_error&)
        {
            // regex complexity limit on a pathological run; skip this pattern
        }
    }
    std::sort(accepted.begin(), accepted.end(), [](const Accepted& a, const Accepted& b) { return a.begin < b.begin; });
    std::vector<IocHit> out;
    for (const auto& a : accepted)
    {
        IocHit h;
        h.kind = a.kind;
        h.value = text.substr(a.begin, a.end - a.begin);
        h.source = s.source;
        h.source.offset += a.begin;
        if (h.source.memory_addr)
            *h.source.memory_addr += a.begin;
        out.push_back(std::move(h));
    }
    return out;
}

std::vector<std::pair<IocKind, std::string>> IocPatternSet::sources() const
{
    std::vector<std::pair<IocKind, std::string>> out;
    for (const auto& p : m_impl->patterns)
        out.emplace_back(p.kind, p.source);
    return out;
}

std::vector<IocHit> match_iocs(const std::vector<ExtractedString>& strings, const IocPatternSet& patterns)
{
    std::vector<IocHit> out;
    for (const auto& s : strings)
    {
        for (auto& h : patterns.match(s))
            out.push_back(std::move(h));
    }
    return out;
}
}  // namespace wasmdroid
