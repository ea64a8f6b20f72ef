// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "tsv.hpp"
#include <wasmdroid/data.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/glob.hpp>
#include <wasmdroid/indicators.hpp>
#include <algorithm>
#include <cstring>
#include <set>
#include <tuple>

namespace wasmdroid
{
std::string_view to_string(Severity s) noexcept
{
    switch (s)
    {
    case Severity::Info:
        return "Info";
    case Severity::Suspicious:
        return "Suspicious";
    case Severity::Strong:
        return "Strong";
    }
    return "?";
}

std::string_view to_string(Channel c) noexcept
{
    switch (c)
    {
    case Channel::WebView:
        return "WebView";
    case Channel::JsEngine:
        return "JsEngine";
    case Channel::NativeRuntime:
        return "NativeRuntime";
    case Channel::Generic:
        return "Generic";
    }
    return "?";
}

std::string_view to_string(MatchKind k) noexcept
{
    switch (k)
    {
    case MatchKind::PathGlob:
        return "PathGlob";
    case MatchKind::Token:
        return "Token";
    case MatchKind::SymbolToken:
        return "SymbolToken";
    case MatchKind::ByteSignature:
        return "ByteSignature";
    case MatchKind::Builtin:
        return "Builtin";
    }
    return "?";
}

std::string_view to_string(DetectionPoint p) noexcept
{
    switch (p)
    {
    case DetectionPoint::WasmFiles:
        return "WasmFiles";
    case DetectionPoint::ByteArrays:
        return "ByteArrays";
    case DetectionPoint::NativeRuntime:
        return "NativeRuntime";
    case DetectionPoint::JavaApi:
        return "JavaApi";
    case DetectionPoint::Structural:
        return "Structural";
    }
    return "?";
}

std::string_view to_string(LocusKind k) noexcept
{
    switch (k)
    {
    case LocusKind::Path:
        return "path";
    case LocusKind::Offset:
        return "offset";
    case LocusKind::StringIndex:
        return "string_index";
    }
    return "?";
}

std::optional<Severity> severity_from_string(std::string_view s) noexcept
{
    for (const auto v : {Severity::Info, Severity::Suspicious, Severity::Strong})
    {
        if (to_string(v) == s)
            return v;
    }
    return std::nullopt;
}

std::optional<Channel> channel_from_string(std::string_view s) noexcept
{
    for (const auto v : {Channel::WebView, Channel::JsEngine, Channel::NativeRuntime, Channel::Generic})
    {
        if (to_string(v) == s)
            return v;
    }
    return std::nullopt;
}

namespace
{
std::optional<MatchKind> match_kind_from_string(std::string_view s) noexcept
{
    for (const auto v : {MatchKind::PathGlob, MatchKind::Token, MatchKind::SymbolToken, MatchKind::ByteSignature,
             MatchKind::Builtin})
    {
        if (to_string(v) == s)
            return v;
    }
    return std::nullopt;
}

std::optional<Bytes> decode_hex(std::string_view hex)
{
    if (hex.empty() || hex.size() % 2 != 0)
        return std::nullopt;
    Bytes out;
    for (size_t i = 0; i < hex.size(); i += 2)
    {
        unsigned v = 0;
        for (size_t k = 0; k < 2; ++k)
        {
            const char c = hex[i + k];
            v <<= 4;
            if (c >= '0' && c <= '9')
                v |= static_cast<unsigned>(c - '0');
            else if (c >= 'a' && c <= 'f')
                v |= static_cast<unsigned>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F')
                v |= static_cast<unsigned>(c - 'A' + 10);
            else
                return std::nullopt;
        }
        out.push_back(static_cast<uint8_t>(v));
    }
    return out;
}

bool known_event(std::string_view e)
{
    return e == builtin_events::DuplicateEntry || e == builtin_events::MalformedDexString ||
           e == builtin_events::MalformedWasmSection || e == builtin_events::JniWasmBridge;
}

Indicator make(const CatalogEntry& e, const std::string& path, uint32_t occ, LocusKind locus, uint64_t pos,
    std::string evidence)
{
    return Indicator{e.id, e.severity, e.channel, path, occ, locus, pos, std::move(evidence)};
}

/// Every start offset of `needle` in `hay`.
std::vector<size_t> find_all(ByteView hay, ByteView needle)
{
    std::vector<size_t> out;
    if (needle.empty() || hay.size() < needle.size())
        return out;
    auto it = hay.begin();
    while (true)
    {
        it = std::search(it, hay.end(), needle.begin(), needle.end());
        if (it == hay.end())
            break;
        out.push_back(static_cast<size_t>(it - hay.begin()));
        ++it;
    }
    return out;
}

/// NUL-delimited string around `pos`, bounded so evidence stays short.
std::string enclosing_string(ByteView b, size_t pos, size_t len)
{
    constexpr size_t limit = 256;
    size_t begin = pos;
    while (begin > 0 && b[begin - 1] != 0 && pos - begin < limit)
        --begin;
    size_t end = pos + len;
    while (end < b.size() && b[end] != 0 && end - begin < limit)
        ++end;
    std::string out;
    for (size_t i = begin; i < end; ++i)
        out.push_back((b[i] >= 0x20 && b[i] < 0x7F) ? static_cast<char>(b[i]) : '.');
    return out;
}

bool in_primary(size_t off, const std::optional<size_t>& primary)
{
    return !primary || off < *primary;
}

bool is_ident(uint8_t c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '$';
}
}  // namespace

DetectionPoint CatalogEntry::detection_point() const noexcept
{
    if (match == MatchKind::ByteSignature)
        return DetectionPoint::ByteArrays;
    if (channel == Channel::NativeRuntime)
        return DetectionPoint::NativeRuntime;
    if (channel == Channel::WebView || channel == Channel::JsEngine)
        return DetectionPoint::JavaApi;
    if (match == MatchKind::PathGlob)
        return DetectionPoint::WasmFiles;
    return DetectionPoint::Structural;
}

std::string_view CatalogEntry::evidence_kind() const noexcept
{
    if (severity == Severity::Info)
        return {};
    if (channel == Channel::NativeRuntime && (match == MatchKind::PathGlob || match == MatchKind::SymbolToken))
        return "runtime-lib";
    if (match == MatchKind::Token || (match == MatchKind::Builtin && pattern == builtin_events::JniWasmBridge))
        return "bridge-token";
    return {};
}

IndicatorCatalog IndicatorCatalog::parse(std::string_view text)
{
    IndicatorCatalog cat;
    std::set<std::string> ids;
    for (const auto& row : detail::read_tsv(text))
    {
        const auto where = "indicator catalog line " + std::to_string(row.number);
        if (row.fields.size() != 5)
            throw Error{ErrorCode::CatalogError, where + ": expected 5 tab-separated fields"};
        CatalogEntry e;
        e.id = std::string{row.fields[0]};
        const auto channel = channel_from_string(row.fields[1]);
        const auto severity = severity_from_string(row.fields[2]);
        const auto match = match_kind_from_string(row.fields[3]);
        e.pattern = std::string{row.fields[4]};
        if (e.id.empty() || e.pattern.empty())
            throw Error{ErrorCode::CatalogError, where + ": empty id or pattern"};
        if (!channel)
            throw Error{ErrorCode::CatalogError, where + ": unknown channel '" + std::string{row.fields[1]} + "'"};
        if (!severity)
            throw Error{ErrorCode::CatalogError, where + ": unknown severity '" + std::string{row.fields[2]} + "'"};
        if (!match)
            throw Error{ErrorCode::CatalogError, where + ": unknown match kind '" + std::string{row.fields[3]} + "'"};
        e.channel = *channel;
        e.severity = *severity;
        e.match = *match;
        if (e.match == MatchKind::ByteSignature)
        {
            auto sig = decode_hex(e.pattern);
            if (!sig)
                throw Error{ErrorCode::CatalogError, where + ": byte signature must be hex"};
            e.signature = std::move(*sig);
        }
        if (e.match == MatchKind::Builtin && !known_event(e.pattern))
            throw Error{ErrorCode::CatalogError, where + ": unknown builtin event '" + e.pattern + "'"};
        if (!ids.insert(e.id).second)
            throw Error{ErrorCode::CatalogError, where + ": duplicate id '" + e.id + "'"};
        cat.m_entries.push_back(std::move(e));
    }
    cat.m_digest = sha256_hex(text);
    return cat;
}

const IndicatorCatalog& IndicatorCatalog::builtin()
{
    static const IndicatorCatalog cat = parse(builtin_data::indicators_tsv());
    return cat;
}

const CatalogEntry* IndicatorCatalog::find(std::string_view id) const
{
    for (const auto& e : m_entries)
    {
        if (e.id == id)
            return &e;
    }
    return nullptr;
}

const CatalogEntry* IndicatorCatalog::builtin_event(std::string_view event) const
{
    for (const auto& e : m_entries)
    {
        if (e.match == MatchKind::Builtin && e.pattern == event)
            return &e;
    }
    return nullptr;
}

std::vector<Indicator> scan_paths(const IndicatorCatalog& catalog, const ApkInventory& inv)
{
    std::vector<Indicator> out;
    for (const auto& entry : inv.entries())
    {
        for (const auto& e : catalog.entries())
        {
            if (e.match == MatchKind::PathGlob && glob_match(e.pattern, entry.path, true))
                out.push_back(make(e, entry.path, entry.occurrence, LocusKind::Path, 0, entry.path));
        }
    }
    if (const auto* dup = catalog.builtin_event(builtin_events::DuplicateEntry))
    {
        for (const auto& path : inv.duplicates())
        {
            uint32_t n = 0;
            for (const auto& entry : inv.entries())
                n += entry.path == path;
            out.push_back(make(*dup, path, 0, LocusKind::Path, 0, std::to_string(n) + " records named " + path));
        }
    }
    return out;
}

std::vector<Indicator> scan_dex_tokens(const IndicatorCatalog& catalog, const std::string& path, uint32_t occurrence,
    const DexFile& dex)
{
    std::vector<Indicator> out;
    std::vector<std::string> tokens;
    std::vector<const CatalogEntry*> owners;
    for (const auto& e : catalog.entries())
    {
        if (e.match == MatchKind::Token)
        {
            tokens.push_back(e.pattern);
            owners.push_back(&e);
        }
    }
    for (const auto& hit : dex_strings_matching(dex, tokens))
    {
        for (const auto* e : owners)
        {
            if (e->pattern == hit.token)
                out.push_back(make(*e, path, occurrence, LocusKind::StringIndex, hit.string_index,
                    dex.strings[hit.string_index]));
        }
    }
    if (dex.malformed_strings > 0)
    {
        if (const auto* ev = catalog.builtin_event(builtin_events::MalformedDexString))
            out.push_back(make(*ev, path, occurrence, LocusKind::Path, 0,
                std::to_string(dex.malformed_strings) + " strings with invalid MUTF-8"));
    }
    return out;
}

std::vector<Indicator> scan_text_tokens(const IndicatorCatalog& catalog, const std::string& path, uint32_t occurrence,
    ByteView text)
{
    std::vector<Indicator> out;
    for (const auto& e : catalog.entries())
    {
        if (e.match != MatchKind::Token)
            continue;
        for (const auto off : find_all(text, as_bytes(e.pattern)))
            out.push_back(make(e, path, occurrence, LocusKind::Offset, off, e.pattern));
    }
    return out;
}

std::vector<Indicator> scan_native_symbols(const IndicatorCatalog& catalog, const std::string& path,
    uint32_t occurrence, ByteView buffer, uint64_t base, std::optional<size_t> primary)
{
    std::vector<Indicator> out;
    for (const auto& e : catalog.entries())
    {
        if (e.match != MatchKind::SymbolToken)
            continue;
        for (const auto off : find_all(buffer, as_bytes(e.pattern)))
        {
            if (in_primary(off, primary))
                out.push_back(make(e, path, occurrence, LocusKind::Offset, base + off,
                    enclosing_string(buffer, off, e.pattern.size())));
        }
    }
    for (auto& ind : jni_wasm_bridges(buffer, path, occurrence, catalog))
    {
        if (in_primary(ind.position, primary))
        {
            ind.position += base;
            out.push_back(std::move(ind));
        }
    }
    return out;
}

std::vector<Indicator> scan_byte_signatures(const IndicatorCatalog& catalog, const std::string& path,
    uint32_t occurrence, ByteView buffer, uint64_t base, std::optional<size_t> primary)
{
    std::vector<Indicator> out;
    for (const auto& e : catalog.entries())
    {
        if (e.match != MatchKind::ByteSignature)
            continue;
        for (const auto off : find_all(buffer, e.signature))
        {
            if (in_primary(off, primary))
                out.push_back(make(e, path, occurrence, LocusKind::Offset, base + off, to_hex(e.signature)));
        }
    }
    return out;
}

std::vector<Indicator> scan_candidates(const IndicatorCatalog& catalog, const std::vector<CarvedCandidate>& candidates)
{
    std::vector<Indicator> out;
    const auto* ev = catalog.builtin_event(builtin_events::MalformedWasmSection);
    if (!ev)
        return out;
    for (const auto& c : candidates)
    {
        if (!c.module || !c.module->has_malformed_section())
            continue;
        for (const auto& s : c.module->sections)
        {
            if (s.malformed)
                out.push_back(make(*ev, c.source_path, c.source_occurrence, LocusKind::Offset, c.offset + s.offset,
                    std::string{section_name(s.id)} + ": " + s.error));
        }
    }
    return out;
}

std::vector<Indicator> jni_wasm_bridges(ByteView bytes, const std::string& path, uint32_t occurrence,
    const IndicatorCatalog& catalog)
{
    std::vector<Indicator> out;
    const auto* ev = catalog.builtin_event(builtin_events::JniWasmBridge);
    if (!ev)
        return out;
    static constexpr std::string_view prefix = "Java_";
    for (const auto off : find_all(bytes, as_bytes(prefix)))
    {
        if (off > 0 && is_ident(bytes[off - 1]))
            continue;
        size_t end = off + prefix.size();
        while (end < bytes.size() && is_ident(bytes[end]))
            ++end;
        if (end < bytes.size() && bytes[end] != 0)
            continue;  // symbols are NUL-terminated
        const std::string symbol{as_chars(bytes.subspan(off, end - off))};
        const auto rest = std::string_view{symbol}.substr(prefix.size());
        if (rest.find("wasm") != std::string_view::npos || rest.find("Wasm") != std::string_view::npos ||
            rest.find("WASM") != std::string_view::npos)
            out.push_back(make(*ev, path, occurrence, LocusKind::Offset, off, symbol));
    }
    return out;
}

void finalize_indicators(std::vector<Indicator>& indicators, const IndicatorCatalog& catalog,
    bool parsed_module_present)
{
    // Only a bundled runtime library file counts; a symbol string alone does not.
    bool runtime_lib = false;
    for (const auto& ind : indicators)
    {
        const auto* e = catalog.find(ind.id);
        runtime_lib = runtime_lib || (e && e->channel == Channel::NativeRuntime && e->match == MatchKind::PathGlob &&
                                         e->severity != Severity::Info);
    }
    if (!parsed_module_present && !runtime_lib)
    {
        for (auto& ind : indicators)
        {
            if (ind.severity == Severity::Strong)
                ind.severity = Severity::Suspicious;
        }
    }
    auto key = [](const Indicator& i) {
        return std::tie(i.id, i.path, i.occurrence, i.locus, i.position, i.evidence, i.severity, i.channel);
    };
    std::sort(indicators.begin(), indicators.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    indicators.erase(std::unique(indicators.begin(), indicators.end()), indicators.end());
}

std::vector<Indicator> scan_indicators(const IndicatorCatalog& catalog, const ApkInventory& inv,
    const std::vector<DexRef>& dexes, const std::vector<EntryRef>& html_js, const std::vector<EntryRef>& native_libs,
    const std::vector<EntryRef>& other_entries, const std::vector<CarvedCandidate>& candidates)
{
    auto out = scan_paths(catalog, inv);
    auto append = [&](std::vector<Indicator> v) {
        out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    };
    auto name = [&](size_t i) -> const ArchiveEntry& { return inv.entries()[i]; };
    for (const auto& d : dexes)
    {
        append(scan_dex_tokens(catalog, name(d.entry_index).path, name(d.entry_index).occurrence, *d.dex));
    }
    for (const auto& h : html_js)
        append(scan_text_tokens(catalog, name(h.entry_index).path, name(h.entry_index).occurrence, h.bytes));
    for (const auto& n : native_libs)
    {
        append(scan_native_symbols(catalog, name(n.entry_index).path, name(n.entry_index).occurrence, n.bytes));
    }
    for (const auto& o : other_entries)
    {
        append(scan_byte_signatures(catalog, name(o.entry_index).path, name(o.entry_index).occurrence, o.bytes));
    }
    append(scan_candidates(catalog, candidates));
    return out;
}
}  // namespace wasmdroid
