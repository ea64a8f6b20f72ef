// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/data.hpp>
#include <wasmdroid/dex.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/parallel.hpp>
#include <wasmdroid/scan.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>

namespace wasmdroid
{
namespace fs = std::filesystem;

Bytes read_file(const fs::path& p)
{
    std::ifstream in{p, std::ios::binary};
    if (!in)
        throw Error{ErrorCode::IoError, "cannot open " + p.string()};
    Bytes out{std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
    if (in.bad())
        throw Error{ErrorCode::IoError, "cannot read " + p.string()};
    return out;
}

namespace
{
std::string read_text(const fs::path& p)
{
    const auto b = read_file(p);
    return std::string{as_chars(b)};
}

std::optional<std::string> from_dir(const std::optional<fs::path>& dir, const char* name)
{
    if (!dir)
        return std::nullopt;
    const auto p = *dir / name;
    if (!fs::exists(p))
        return std::nullopt;
    return read_text(p);
}
}  // namespace

Catalogs Catalogs::builtin()
{
    return Catalogs{IndicatorCatalog::parse(builtin_data::indicators_tsv()),
        CapabilityTable::parse(builtin_data::capabilities_tsv()),
        IocPatternSet::parse(builtin_data::ioc_patterns_tsv()), ScoringTable::parse(builtin_data::weights_tsv())};
}

Catalogs Catalogs::load(const std::optional<fs::path>& catalog_dir, const std::optional<fs::path>& indicator_file,
    const std::optional<fs::path>& weights_file)
{
    auto dir = catalog_dir;
    if (!dir)
    {
        if (const char* env = std::getenv(kCatalogDirEnv); env && *env)
            dir = fs::path{env};
    }
    if (dir && !fs::is_directory(*dir))
        throw Error{ErrorCode::IoError, "catalog directory " + dir->string() + " does not exist"};

    auto pick = [&](const std::optional<fs::path>& file, const char* name, std::string_view fallback) {
        if (file)
            return read_text(*file);
        if (auto t = from_dir(dir, name))
            return *t;
        return std::string{fallback};
    };
    const auto indicators = pick(indicator_file, "indicators.tsv", builtin_data::indicators_tsv());
    const auto capabilities = pick(std::nullopt, "capabilities.tsv", builtin_data::capabilities_tsv());
    const auto patterns = pick(std::nullopt, "ioc_patterns.tsv", builtin_data::ioc_patterns_tsv());
    const auto weights = pick(weights_file, "weights.tsv", builtin_data::weights_tsv());
    return Catalogs{IndicatorCatalog::parse(indicators), CapabilityTable::parse(capabilities),
        IocPatternSet::parse(patterns), ScoringTable::parse(weights)};
}

std::map<std::string, std::string> Catalogs::digests() const
{
    return {{"capabilities", capabilities.digest()}, {"indicators", indicators.digest()},
        {"ioc_patterns", ioc_patterns.digest()}, {"weights", weights.digest()}};
}

namespace
{
struct EntryFindings
{
    std::vector<Indicator> indicators;
    std::vector<HostIoc> host_iocs;
    std::vector<std::string> warnings;
};

/// Preopen mappings in native-library strings: the host side of a WASI sandbox.
void host_preopens(const Catalogs& cats, const ArchiveEntry& entry, ByteView buffer, uint64_t base,
    std::optional<size_t> primary, size_t min_len, std::vector<HostIoc>& out)
{
    StringSource src;
    src.origin = StringOrigin::WholeBinary;
    for (const auto& s : printable_runs(buffer, min_len, src))
    {
        if (primary && s.source.offset >= *primary)
            continue;
        for (auto& hit : cats.ioc_patterns.match(s))
        {
            if (hit.kind != IocKind::PreopenMapping)
                continue;
            hit.source.offset += base;
            out.push_back({entry.path, entry.occurrence, std::move(hit)});
        }
    }
}

EntryFindings scan_entry(const ApkInventory& inv, size_t idx, const Catalogs& cats, const ScanOptions& opts)
{
    EntryFindings f;
    const auto& entry = inv.entries()[idx];
    const auto cls = inv.class_of(idx);
    if (cls == FileClass::UnsupportedCompression)
        return f;
    const auto& catalog = cats.indicators;
    auto append = [&](std::vector<Indicator> v) {
        f.indicators.insert(f.indicators.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    };

    if (entry.uncompressed_size > opts.carve.stream_threshold && cls != FileClass::Dex && cls != FileClass::HtmlJs)
    {
        const size_t lookahead = std::max<size_t>(opts.carve.lookahead, 4096);
        for_each_window(inv, idx, opts.carve.window, lookahead, [&](ByteView buf, uint64_t base, size_t primary) {
            if (cls == FileClass::NativeLib)
            {
                append(scan_native_symbols(catalog, entry.path, entry.occurrence, buf, base, primary));
                host_preopens(cats, entry, buf, base, primary, opts.min_string_len, f.host_iocs);
            }
            if (cls != FileClass::WasmFile)
                append(scan_byte_signatures(catalog, entry.path, entry.occurrence, buf, base, primary));
        });
        return f;
    }

    const auto payload = entry_bytes(inv, idx);
    if (!payload.crc_ok)
        f.warnings.push_back(entry.path + ": CRC mismatch or corrupt data");
    const ByteView bytes = payload.bytes;
    switch (cls)
    {
    case FileClass::Dex:
        try
        {
            const auto dex = parse_dex(bytes);
            append(scan_dex_tokens(catalog, entry.path, entry.occurrence, dex));
        }
        catch (const Error& e)
        {
            f.warnings.push_back(entry.path + ": " + e.what());
        }
        break;
    case FileClass::HtmlJs:
        append(scan_text_tokens(catalog, entry.path, entry.occurrence, bytes));
        break;
    case FileClass::NativeLib:
        append(scan_native_symbols(catalog, entry.path, entry.occurrence, bytes));
        host_preopens(cats, entry, bytes, 0, std::nullopt, opts.min_string_len, f.host_iocs);
        break;
    default:
        break;
    }
    if (cls != FileClass::WasmFile)
        append(scan_byte_signatures(catalog, entry.path, entry.occurrence, bytes));
    return f;
}

ModuleFindings analyse_module(const CarvedCandidate& c, const Catalogs& cats, const ScanOptions& opts)
{
    ModuleFindings f;
    if (!c.module)
        return f;
    f.profiles = profile_exports(*c.module, cats.capabilities);
    const auto mode = opts.deep ? ExtractMode::WholeBinary : ExtractMode::SegmentsOnly;
    f.iocs = match_iocs(extract_strings(*c.module, opts.min_string_len, mode, c.bytes), cats.ioc_patterns);
    return f;
}

std::vector<ModuleFindings> analyse_all(const std::vector<CarvedCandidate>& cands, const Catalogs& cats,
    const ScanOptions& opts)
{
    std::vector<ModuleFindings> out(cands.size());
    parallel_for(cands.size(), opts.jobs, [&](size_t i) { out[i] = analyse_module(cands[i], cats, opts); });
    return out;
}
}  // namespace

ScanResult scan_apk(const std::string& label, Bytes bytes, const Catalogs& cats, const ScanOptions& opts)
{
    const auto digest = sha256_hex(bytes);
    const auto inv = open_archive(std::move(bytes));
    auto carve_opts = opts.carve;
    carve_opts.jobs = opts.jobs;
    auto carved = scan_inventory(inv, carve_opts);

    const auto n = inv.entries().size();
    std::vector<EntryFindings> per_entry(n);
    parallel_for(n, opts.jobs, [&](size_t i) {
        try
        {
            per_entry[i] = scan_entry(inv, i, cats, opts);
        }
        catch (const Error& e)
        {
            per_entry[i].warnings.push_back(inv.entries()[i].path + ": " + e.what());
        }
    });

    ReportInputs in;
    in.target_path = label;
    in.target_kind = "apk";
    in.target_sha256 = digest;
    in.inventory = &inv;
    in.candidates = &carved.candidates;
    in.catalog_digests = cats.digests();
    in.capabilities = &cats.capabilities;
    in.catalog = &cats.indicators;
    in.warnings = inv.warnings();
    in.warnings.insert(in.warnings.end(), carved.warnings.begin(), carved.warnings.end());
    for (auto& f : per_entry)
    {
        in.indicators.insert(in.indicators.end(), f.indicators.begin(), f.indicators.end());
        in.host_iocs.insert(in.host_iocs.end(), f.host_iocs.begin(), f.host_iocs.end());
        in.warnings.insert(in.warnings.end(), f.warnings.begin(), f.warnings.end());
    }
    auto structural = scan_paths(cats.indicators, inv);
    in.indicators.insert(in.indicators.end(), structural.begin(), structural.end());
    auto malformed = scan_candidates(cats.indicators, carved.candidates);
    in.indicators.insert(in.indicators.end(), malformed.begin(), malformed.end());

    const bool parsed = std::any_of(carved.candidates.begin(), carved.candidates.end(),
        [](const CarvedCandidate& c) { return c.status == CarveStatus::Parsed; });
    finalize_indicators(in.indicators, cats.indicators, parsed);
    in.findings = analyse_all(carved.candidates, cats, opts);

    ScanResult result;
    result.report = assemble(in, cats.weights);
    result.candidates = std::move(carved.candidates);
    return result;
}

ScanResult scan_wasm(const std::string& label, Bytes bytes, const Catalogs& cats, const ScanOptions& opts)
{
    std::vector<CarvedCandidate> cands;
    for (const auto off : scan_magic(bytes))
    {
        auto c = carve(bytes, off);
        c.source_path = label;
        c.source_class = FileClass::WasmFile;
        cands.push_back(std::move(c));
    }

    ReportInputs in;
    in.target_path = label;
    in.target_kind = "wasm";
    in.target_sha256 = sha256_hex(bytes);
    in.candidates = &cands;
    in.catalog_digests = cats.digests();
    in.capabilities = &cats.capabilities;
    in.catalog = &cats.indicators;
    if (!cands.empty() && cands.front().offset == 0 && cands.front().status == CarveStatus::Parsed &&
        cands.front().length < bytes.size())
        in.warnings.push_back(std::to_string(bytes.size() - cands.front().length) +
                              " trailing bytes after the module were not parsed");
    auto malformed = scan_candidates(cats.indicators, cands);
    in.indicators.insert(in.indicators.end(), malformed.begin(), malformed.end());
    finalize_indicators(in.indicators, cats.indicators, true);
    in.findings = analyse_all(cands, cats, opts);

    ScanResult result;
    result.report = assemble(in, cats.weights);
    result.candidates = std::move(cands);
    return result;
}

ScanResult scan_bytes(const std::string& label, Bytes bytes, const Catalogs& cats, const ScanOptions& opts)
{
    if (bytes.size() >= 4 && std::equal(kWasmMagic.begin(), kWasmMagic.end(), bytes.begin()))
        return scan_wasm(label, std::move(bytes), cats, opts);
    return scan_apk(label, std::move(bytes), cats, opts);
}
}  // namespace wasmdroid
