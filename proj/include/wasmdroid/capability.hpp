// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "wasm.hpp"
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wasmdroid
{
/// Capability category name. The set of categories is open: tables may
/// introduce new ones (e.g. a network tag for `http_*` imports).
struct Capability
{
    std::string name;

    friend auto operator<=>(const Capability&, const Capability&) = default;
};

namespace capabilities
{
inline const Capability WasiFilesystem{"WasiFilesystem"};
inline const Capability WasiEnviron{"WasiEnviron"};
inline const Capability WasiClockRandom{"WasiClockRandom"};
inline const Capability HostCustom{"HostCustom"};
inline const Capability None{"None"};
}  // namespace capabilities

struct CapabilityRule
{
    std::string ns_glob;
    std::string name_glob;
    Capability category;
};

/// Ordered rule list; the first rule whose namespace and name globs both
/// match decides. Unmatched imports are HostCustom.
class CapabilityTable
{
public:
    /// Format: `namespace<TAB>name_glob<TAB>category`, `#` comments.
    /// Throws CatalogError on malformed lines.
    static CapabilityTable parse(std::string_view text);
    static const CapabilityTable& builtin();

    Capability classify(std::string_view module, std::string_view name) const;
    const std::vector<CapabilityRule>& rules() const noexcept { return m_rules; }
    const std::string& digest() const noexcept { return m_digest; }

private:
    std::vector<CapabilityRule> m_rules;
    std::string m_digest;
};

Capability classify_import(std::string_view module, std::string_view name);

struct CallGraph
{
    uint32_t node_count = 0;
    uint32_t imported_count = 0;
    std::vector<std::vector<uint32_t>> edges;  ///< sorted, unique targets per node
    std::set<uint32_t> indirect_nodes;
    std::set<uint32_t> opaque_nodes;
    std::set<uint32_t> table_funcs;

    bool is_imported(uint32_t f) const noexcept { return f < imported_count; }
    friend bool operator==(const CallGraph&, const CallGraph&) = default;
};

/// One node per function index; local functions without a body, or whose
/// calls leave the index space, become opaque.
CallGraph build_call_graph(const WasmModule& m);

enum class Soundness
{
    Exact,
    OverApprox,
};

std::string_view to_string(Soundness s) noexcept;

struct CapabilityProfile
{
    std::string export_name;
    uint32_t function_index = 0;
    std::set<std::pair<std::string, std::string>> reachable_imports;
    std::set<Capability> categories;
    Soundness soundness = Soundness::Exact;
};

/// Transitive host imports reachable from `m.exports[export_index]`.
/// call_indirect widens to every table function, opaque bodies to every
/// import. Throws NotAFunctionExport.
CapabilityProfile reachable_imports(const CallGraph& g, const WasmModule& m, size_t export_index,
    const CapabilityTable& table = CapabilityTable::builtin());

/// Profiles for every function export, in export order.
std::vector<CapabilityProfile> profile_exports(const WasmModule& m,
    const CapabilityTable& table = CapabilityTable::builtin());
}  // namespace wasmdroid
