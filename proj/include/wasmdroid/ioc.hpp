// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include "wasm.hpp"
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid
{
enum class StringOrigin
{
    DataSegment,
    WholeBinary,
    CustomSection,
};

std::string_view to_string(StringOrigin o) noexcept;

struct StringSource
{
    StringOrigin origin = StringOrigin::WholeBinary;
    uint32_t segment = 0;  ///< DataSegment
    uint64_t offset = 0;  ///< in the segment, custom section payload or binary
    std::optional<uint64_t> memory_addr;  ///< DataSegment with resolved base
    std::string section;  ///< CustomSection name

    friend bool operator==(const StringSource&, const StringSource&) = default;
};

struct ExtractedString
{
    std::string text;
    StringSource source;
    size_t length = 0;  ///< code points
};

enum class ExtractMode
{
    SegmentsOnly,
    WholeBinary,
};

inline constexpr size_t kDefaultMinStringLength = 6;

/// Maximal runs of printable ASCII and well-formed non-control UTF-8 of at
/// least `min_len` code points, scanned in `bytes`. Offsets are relative to
/// `bytes`.
std::vector<ExtractedString> printable_runs(ByteView bytes, size_t min_len, StringSource base);

/// SegmentsOnly scans data segments and custom sections. WholeBinary adds the
/// runs of `m.consumed` raw bytes (`raw` must then hold the module bytes), so
/// its result is a superset.
std::vector<ExtractedString> extract_strings(const WasmModule& m, size_t min_len, ExtractMode mode,
    ByteView raw = {});

enum class IocKind
{
    Url,
    PreopenMapping,
    Ipv4,
    Domain,
    UnixPath,
};

std::string_view to_string(IocKind k) noexcept;
std::optional<IocKind> ioc_kind_from_string(std::string_view s) noexcept;

struct IocHit
{
    IocKind kind = IocKind::Url;
    std::string value;
    StringSource source;
};

/// Named regular expressions, applied in file order. A later pattern's match
/// overlapping an earlier accepted match in the same string is dropped, so a
/// URL is not also reported as a domain or path.
class IocPatternSet
{
public:
    /// Format: `kind<TAB>regex`, `#` comments. Throws CatalogError.
    static IocPatternSet parse(std::string_view text);
    static const IocPatternSet& builtin();

    IocPatternSet();
    ~IocPatternSet();
    IocPatternSet(IocPatternSet&&) noexcept;
    IocPatternSet& operator=(IocPatternSet&&) noexcept;

    std::vector<IocHit> match(const ExtractedString& s) const;
    const std::string& digest() const noexcept { return m_digest; }
    std::vector<std::pair<IocKind, std::string>> sources() const;

private:
    struct Impl;
    std::unique_ptr<Impl> m_impl;
    std::string m_digest;
};

std::vector<IocHit> match_iocs(const std::vector<ExtractedString>& strings,
    const IocPatternSet& patterns = IocPatternSet::builtin());
}  // namespace wasmdroid
