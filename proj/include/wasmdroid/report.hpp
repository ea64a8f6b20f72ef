// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "capability.hpp"
#include "carver.hpp"
#include "container.hpp"
#include "indicators.hpp"
#include "ioc.hpp"
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid
{
inline constexpr std::string_view kSchemaVersion = "1.0.0";
inline constexpr std::string_view kToolVersion = "0.1.0";

/// Ordered tiers; comparisons follow severity.
enum class Verdict
{
    Clean,
    WasmPresent,
    SuspiciousHiding,
    LikelyMaliciousHiding,
};

std::string_view to_string(Verdict v) noexcept;
std::optional<Verdict> verdict_from_string(std::string_view s) noexcept;

namespace evidence_kinds
{
inline constexpr std::string_view WasmAsset = "wasm-asset";
inline constexpr std::string_view MagicOnly = "magic-only";
inline constexpr std::string_view ParsedModule = "parsed-module";
inline constexpr std::string_view CarvedHidden = "carved-hidden";
inline constexpr std::string_view RuntimeLib = "runtime-lib";
inline constexpr std::string_view BridgeToken = "bridge-token";
std::string capability(const Capability& c);  ///< "capability:<Name>"
std::string ioc(IocKind k);  ///< "ioc:<Kind>"
}  // namespace evidence_kinds

struct CapGroup
{
    std::string name;
    std::set<std::string> kinds;
    uint64_t cap = 0;
};

/// Fires when one module carries `required` evidence and any of `any_of`.
struct HardTrigger
{
    std::string name;
    std::string required;
    std::set<std::string> any_of;
};

class ScoringTable
{
public:
    /// Line format (TAB separated, `#` comments):
    ///   weight <kind> <n>
    ///   cap <name> <n> <kind,kind,...>
    ///   threshold <WasmPresent|SuspiciousHiding|LikelyMaliciousHiding> <n>
    ///   trigger <name> <required-kind> <kind,kind,...>
    /// Throws CatalogError unless all three thresholds are present and
    /// strictly increasing.
    static ScoringTable parse(std::string_view text);
    static const ScoringTable& builtin();

    uint64_t weight(std::string_view kind) const;
    const std::map<std::string, uint64_t, std::less<>>& weights() const noexcept { return m_weights; }
    const std::vector<CapGroup>& caps() const noexcept { return m_caps; }
    const std::vector<HardTrigger>& triggers() const noexcept { return m_triggers; }
    uint64_t wasm_present_min() const noexcept { return m_wasm_present; }
    uint64_t suspicious_min() const noexcept { return m_suspicious; }
    uint64_t malicious_min() const noexcept { return m_malicious; }
    const std::string& digest() const noexcept { return m_digest; }

    Verdict verdict_for(uint64_t score, bool hard_trigger) const noexcept;

private:
    std::map<std::string, uint64_t, std::less<>> m_weights;
    std::vector<CapGroup> m_caps;
    std::vector<HardTrigger> m_triggers;
    uint64_t m_wasm_present = 0;
    uint64_t m_suspicious = 0;
    uint64_t m_malicious = 0;
    std::string m_digest;
};

struct EvidenceRow
{
    std::string kind;
    uint64_t weight = 0;  ///< table weight before caps
    std::string path;
    uint32_t occurrence = 0;
    uint64_t offset = 0;
    std::optional<uint32_t> module;  ///< index into ScanReport::wasm_modules
    std::string detail;

    friend bool operator==(const EvidenceRow&, const EvidenceRow&) = default;
};

struct ImportRecord
{
    std::string module;
    std::string name;
    std::string kind;
    std::string capability;  ///< func imports only

    friend bool operator==(const ImportRecord&, const ImportRecord&) = default;
};

struct ExportRecord
{
    std::string name;
    std::string kind;
    uint32_t index = 0;

    friend bool operator==(const ExportRecord&, const ExportRecord&) = default;
};

struct ProfileRecord
{
    std::string export_name;
    uint32_t function_index = 0;
    std::vector<ImportRecord> reachable_imports;  ///< module/name only
    std::vector<std::string> categories;
    std::string soundness;

    friend bool operator==(const ProfileRecord&, const ProfileRecord&) = default;
};

struct IocRecord
{
    std::string kind;
    std::string value;
    std::string origin;
    uint32_t segment = 0;
    uint64_t offset = 0;
    std::optional<uint64_t> memory_addr;
    std::string section;

    friend bool operator==(const IocRecord&, const IocRecord&) = default;
};

struct ModuleRecord
{
    std::string source;
    uint32_t occurrence = 0;
    std::string source_class;
    uint64_t offset = 0;
    uint64_t length = 0;
    std::string status;
    std::string sha256;  ///< of the extracted bytes, Parsed only
    std::string extract_name;  ///< file name used by --extract-out, Parsed only
    std::string structure_sha256;  ///< of dump_structure() output
    std::string failure;
    std::vector<ImportRecord> imports;
    std::vector<ExportRecord> exports;
    std::vector<ProfileRecord> capabilities;
    std::vector<IocRecord> iocs;
    std::vector<std::string> malformed_sections;

    friend bool operator==(const ModuleRecord&, const ModuleRecord&) = default;
};

/// IoC found outside any module, e.g. a preopen mapping in a native library.
struct HostIocRecord
{
    std::string path;
    uint32_t occurrence = 0;
    std::string kind;
    std::string value;
    uint64_t offset = 0;

    friend bool operator==(const HostIocRecord&, const HostIocRecord&) = default;
};

struct IndicatorRecord
{
    std::string id;
    std::string severity;
    std::string channel;
    std::string path;
    uint32_t occurrence = 0;
    std::string locus;
    uint64_t position = 0;
    std::string evidence;

    friend bool operator==(const IndicatorRecord&, const IndicatorRecord&) = default;
};

struct ScanReport
{
    std::string schema_version{kSchemaVersion};
    std::string tool_version{kToolVersion};
    std::string target_path;
    std::string target_kind;  ///< "apk" or "wasm"
    std::string target_sha256;
    std::map<std::string, std::string> catalog_digests;
    std::map<std::string, uint64_t> inventory_summary;
    std::vector<std::string> duplicates;
    std::vector<ModuleRecord> wasm_modules;
    std::vector<HostIocRecord> host_iocs;
    std::vector<IndicatorRecord> indicators;
    std::vector<EvidenceRow> evidence;
    std::vector<std::string> triggers;
    uint64_t score = 0;
    std::string verdict{"Clean"};
    std::vector<std::string> warnings;

    friend bool operator==(const ScanReport&, const ScanReport&) = default;
};

struct ModuleFindings
{
    std::vector<CapabilityProfile> profiles;
    std::vector<IocHit> iocs;
};

struct HostIoc
{
    std::string path;
    uint32_t occurrence = 0;
    IocHit hit;
};

struct ReportInputs
{
    std::string target_path;
    std::string target_kind;
    std::string target_sha256;
    const ApkInventory* inventory = nullptr;  ///< null for bare modules
    const std::vector<CarvedCandidate>* candidates = nullptr;
    std::vector<ModuleFindings> findings;  ///< parallel to *candidates
    std::vector<HostIoc> host_iocs;
    std::vector<Indicator> indicators;
    std::vector<std::string> warnings;
    std::map<std::string, std::string> catalog_digests;
    const CapabilityTable* capabilities = nullptr;
    const IndicatorCatalog* catalog = nullptr;
};

/// Builds the evidence list, score and verdict. Ordering is deterministic.
ScanReport assemble(const ReportInputs& in, const ScoringTable& table = ScoringTable::builtin());

/// Recomputes the score from evidence kinds alone using `table`.
uint64_t compute_score(const std::vector<EvidenceRow>& evidence, const ScoringTable& table);

/// Names of hard triggers fired by the evidence.
std::vector<std::string> fired_triggers(
    const std::vector<EvidenceRow>& evidence, const ScoringTable& table);

/// Canonical JSON: sorted keys, two-space indent, integers only.
std::string render_json(const ScanReport& r);
ScanReport parse_report_json(std::string_view json);
std::string render_text(const ScanReport& r);

/// "<path with separators replaced>@<offset>.wasm"
std::string extract_file_name(std::string_view source_path, uint64_t offset);
}  // namespace wasmdroid
