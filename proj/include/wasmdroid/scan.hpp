// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "capability.hpp"
#include "carver.hpp"
#include "indicators.hpp"
#include "ioc.hpp"
#include "report.hpp"
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wasmdroid
{
inline constexpr const char* kCatalogDirEnv = "WASMDROID_CATALOG_DIR";

/// Every data table the pipeline consults. Immutable once loaded.
struct Catalogs
{
    IndicatorCatalog indicators;
    CapabilityTable capabilities;
    IocPatternSet ioc_patterns;
    ScoringTable weights;

    static Catalogs builtin();

    /// Explicit files win over `catalog_dir`, which wins over the builtin
    /// tables. `catalog_dir` is searched for indicators.tsv,
    /// capabilities.tsv, ioc_patterns.tsv and weights.tsv; missing files
    /// fall back to builtin. Throws CatalogError or IoError.
    static Catalogs load(const std::optional<std::filesystem::path>& catalog_dir,
        const std::optional<std::filesystem::path>& indicator_file,
        const std::optional<std::filesystem::path>& weights_file);

    std::map<std::string, std::string> digests() const;
};

struct ScanOptions
{
    size_t min_string_len = kDefaultMinStringLength;
    bool deep = false;
    unsigned jobs = 1;
    CarveOptions carve;
};

struct ScanResult
{
    ScanReport report;
    std::vector<CarvedCandidate> candidates;  ///< same order as report.wasm_modules
};

/// Full pipeline over an APK.
ScanResult scan_apk(const std::string& label, Bytes bytes, const Catalogs& catalogs,
    const ScanOptions& options = {});

/// Parser, capability and IoC stages over a bare module.
ScanResult scan_wasm(const std::string& label, Bytes bytes, const Catalogs& catalogs,
    const ScanOptions& options = {});

/// Dispatches on content: Wasm magic → scan_wasm, anything else → scan_apk.
ScanResult scan_bytes(const std::string& label, Bytes bytes, const Catalogs& catalogs,
    const ScanOptions& options = {});

Bytes read_file(const std::filesystem::path& p);
}  // namespace wasmdroid
