// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include "carver.hpp"
#include "container.hpp"
#include "dex.hpp"
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid
{
enum class Severity
{
    Info,
    Suspicious,
    Strong,
};

enum class Channel
{
    WebView,
    JsEngine,
    NativeRuntime,
    Generic,
};

enum class MatchKind
{
    PathGlob,  ///< entry paths
    Token,  ///< DEX string table and HTML/JS text
    SymbolToken,  ///< NUL-terminated strings inside native libraries
    ByteSignature,  ///< hex byte pattern inside any non-.wasm entry
    Builtin,  ///< structural events raised by the scanner itself
};

/// The four places a Wasm payload shows up in an APK.
enum class DetectionPoint
{
    WasmFiles,
    ByteArrays,
    NativeRuntime,
    JavaApi,
    Structural,
};

std::string_view to_string(Severity s) noexcept;
std::string_view to_string(Channel c) noexcept;
std::string_view to_string(MatchKind k) noexcept;
std::string_view to_string(DetectionPoint p) noexcept;
std::optional<Severity> severity_from_string(std::string_view s) noexcept;
std::optional<Channel> channel_from_string(std::string_view s) noexcept;

namespace builtin_events
{
inline constexpr std::string_view DuplicateEntry = "duplicate-entry";
inline constexpr std::string_view MalformedDexString = "malformed-dex-string";
inline constexpr std::string_view MalformedWasmSection = "malformed-wasm-section";
inline constexpr std::string_view JniWasmBridge = "jni-wasm-bridge";
}  // namespace builtin_events

struct CatalogEntry
{
    std::string id;
    Channel channel = Channel::Generic;
    Severity severity = Severity::Info;
    MatchKind match = MatchKind::Token;
    std::string pattern;
    Bytes signature;  ///< decoded pattern for ByteSignature

    DetectionPoint detection_point() const noexcept;
    /// Scoring row fed by this entry, empty when it does not score.
    std::string_view evidence_kind() const noexcept;
};

class IndicatorCatalog
{
public:
    /// Format: `id<TAB>channel<TAB>severity<TAB>match_kind<TAB>pattern`,
    /// `#` comments. Fails closed (CatalogError) on duplicate ids or bad rows.
    static IndicatorCatalog parse(std::string_view text);
    static const IndicatorCatalog& builtin();

    const std::vector<CatalogEntry>& entries() const noexcept { return m_entries; }
    const CatalogEntry* find(std::string_view id) const;
    /// First Builtin entry whose pattern names `event`.
    const CatalogEntry* builtin_event(std::string_view event) const;
    const std::string& digest() const noexcept { return m_digest; }

private:
    std::vector<CatalogEntry> m_entries;
    std::string m_digest;
};

enum class LocusKind
{
    Path,
    Offset,
    StringIndex,
};

std::string_view to_string(LocusKind k) noexcept;

struct Indicator
{
    std::string id;
    Severity severity = Severity::Info;
    Channel channel = Channel::Generic;
    std::string path;
    uint32_t occurrence = 0;
    LocusKind locus = LocusKind::Path;
    uint64_t position = 0;
    std::string evidence;

    friend bool operator==(const Indicator&, const Indicator&) = default;
};

/// Path globs over every entry, plus the duplicate-entry event.
std::vector<Indicator> scan_paths(const IndicatorCatalog& catalog, const ApkInventory& inv);

/// Token entries over a DEX string table, plus malformed-dex-string.
std::vector<Indicator> scan_dex_tokens(const IndicatorCatalog& catalog, const std::string& path,
    uint32_t occurrence, const DexFile& dex);

/// Token entries over HTML/JS text.
std::vector<Indicator> scan_text_tokens(const IndicatorCatalog& catalog, const std::string& path,
    uint32_t occurrence, ByteView text);

/// SymbolToken entries and JNI bridges over a window of native-library bytes.
/// Only strings starting in the first `primary` bytes are reported; positions
/// are `base` + offset.
std::vector<Indicator> scan_native_symbols(const IndicatorCatalog& catalog,
    const std::string& path, uint32_t occurrence, ByteView buffer, uint64_t base = 0,
    std::optional<size_t> primary = std::nullopt);

/// ByteSignature entries over a window of entry bytes.
std::vector<Indicator> scan_byte_signatures(const IndicatorCatalog& catalog,
    const std::string& path, uint32_t occurrence, ByteView buffer, uint64_t base = 0,
    std::optional<size_t> primary = std::nullopt);

/// malformed-wasm-section for parsed candidates with malformed sections.
std::vector<Indicator> scan_candidates(
    const IndicatorCatalog& catalog, const std::vector<CarvedCandidate>& candidates);

/// `Java_` symbols whose remainder mentions wasm, each a NativeRuntime
/// indicator carrying the full symbol.
std::vector<Indicator> jni_wasm_bridges(ByteView native_lib_bytes, const std::string& path = {},
    uint32_t occurrence = 0, const IndicatorCatalog& catalog = IndicatorCatalog::builtin());

/// Caps Strong at Suspicious unless a parsed module or a runtime library
/// file (NativeRuntime path glob) is present, then sorts by (id, locus) and removes exact duplicates.
void finalize_indicators(std::vector<Indicator>& indicators, const IndicatorCatalog& catalog,
    bool parsed_module_present);

struct EntryRef
{
    size_t entry_index = 0;
    ByteView bytes;
};

struct DexRef
{
    size_t entry_index = 0;
    const DexFile* dex = nullptr;
};

/// Whole-entry convenience over the scanners above.
std::vector<Indicator> scan_indicators(const IndicatorCatalog& catalog, const ApkInventory& inv,
    const std::vector<DexRef>& dexes, const std::vector<EntryRef>& html_js,
    const std::vector<EntryRef>& native_libs, const std::vector<EntryRef>& other_entries,
    const std::vector<CarvedCandidate>& candidates);
}  // namespace wasmdroid
