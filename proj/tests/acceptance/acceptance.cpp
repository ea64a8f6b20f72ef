// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include "oracles.hpp"
#include <wasmdroid/carver.hpp>
#include <wasmdroid/scan.hpp>
#include <wasmdroid/testkit/manifest.hpp>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

using namespace wasmdroid;
using namespace wasmdroid::testkit;
namespace fs = std::filesystem;

namespace
{
using Clock = std::chrono::steady_clock;

struct Outcome
{
    bool pass = true;
    std::string detail;
};

double ms_since(Clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Fixture fixture(const std::string& name)
{
    return load_fixture(fs::path{WASMDROID_FIXTURE_DIR} / (name + ".json"));
}

const Catalogs& catalogs()
{
    static const Catalogs c = Catalogs::builtin();
    return c;
}

/// Scans a fixture, returning the report and the scan time alone.
std::pair<ScanReport, double> timed_scan(const std::string& name, const ScanOptions& opts = {})
{
    auto f = fixture(name);
    const auto t0 = Clock::now();
    auto r = scan_bytes(name, std::move(f.bytes), catalogs(), opts).report;
    return {std::move(r), ms_since(t0)};
}

Outcome hidden_ioc_recovery()
{
    const auto [r, ms] = timed_scan("spyware-analog");
    std::vector<std::string> urls;
    bool host_custom_on_run = false;
    for (const auto& m : r.wasm_modules)
    {
        for (const auto& i : m.iocs)
            if (i.kind == "Url")
                urls.push_back(i.value);
        for (const auto& p : m.capabilities)
            if (p.export_name == "run" &&
                std::find(p.categories.begin(), p.categories.end(), "HostCustom") != p.categories.end())
                host_custom_on_run = true;
    }
    for (const auto& h : r.host_iocs)
        if (h.kind == "Url")
            urls.push_back(h.value);
    std::ostringstream d;
    d << "url_iocs=" << urls.size() << " host_custom_on_run=" << host_custom_on_run << " verdict=" << r.verdict
      << " scan_ms=" << ms;
    const bool pass = urls == std::vector<std::string>{test::kSpywareUrl} && host_custom_on_run &&
                      r.verdict == "LikelyMaliciousHiding" && ms < 1000.0;
    return {pass, d.str()};
}

Outcome coverage_matrix()
{
    struct Row
    {
        const char* fixture;
        DetectionPoint point;
        std::vector<std::string> required;
    };
    const std::vector<Row> rows{
        {"coverage-wasm-file", DetectionPoint::WasmFiles, {"wasm-file"}},
        {"coverage-dex-bytearray", DetectionPoint::ByteArrays, {"wasm-signature-bytes"}},
        {"coverage-native-runtime", DetectionPoint::NativeRuntime, {"runtime-wasmedge-lib", "wasmedge-run-from-buffer"}},
        {"coverage-java-api", DetectionPoint::JavaApi, {"webview-evaluate-javascript", "webview-wasm-instantiate"}},
    };
    Outcome o;
    std::ostringstream d;
    for (const auto& row : rows)
    {
        const auto [r, ms] = timed_scan(row.fixture);
        bool ok = ms < 1000.0;
        for (const auto& id : row.required)
            ok = ok && std::any_of(r.indicators.begin(), r.indicators.end(), [&](const auto& i) { return i.id == id; });
        for (const auto& i : r.indicators)
        {
            const auto* entry = catalogs().indicators.find(i.id);
            if (i.severity == "Strong" && (!entry || entry->detection_point() != row.point))
                ok = false;
        }
        d << row.fixture << "=" << (ok ? "ok" : "bad") << "(" << ms << "ms) ";
        o.pass = o.pass && ok;
    }
    o.detail = d.str();
    return o;
}

Outcome ransomware_capability()
{
    const auto [r, ms] = timed_scan("ransomware-analog");
    bool wasi_fs = false;
    bool preopen = false;
    for (const auto& m : r.wasm_modules)
    {
        for (const auto& p : m.capabilities)
            if (p.export_name == "run" &&
                std::find(p.categories.begin(), p.categories.end(), "WasiFilesystem") != p.categories.end())
                wasi_fs = true;
        for (const auto& i : m.iocs)
            preopen = preopen || i.kind == "PreopenMapping";
    }
    std::string mapping;
    for (const auto& h : r.host_iocs)
        if (h.kind == "PreopenMapping")
        {
            preopen = true;
            mapping = h.value;
        }
    std::ostringstream d;
    d << "wasi_filesystem_on_run=" << wasi_fs << " preopen=" << (mapping.empty() ? "-" : mapping)
      << " verdict=" << r.verdict << " scan_ms=" << ms;
    return {wasi_fs && preopen, d.str()};
}

Outcome parser_round_trip()
{
    const auto t0 = Clock::now();
    test::SpecGenerator g{0xA11CE};
    size_t specs = 0;
    size_t mismatches = 0;
    std::string first;
    for (; specs < 1200; ++specs)
    {
        const auto spec = g.module();
        try
        {
            std::string why;
            if (!matches_spec(spec, parse_module(emit_module(spec)), &why))
            {
                ++mismatches;
                if (first.empty())
                    first = why;
            }
        }
        catch (const std::exception& e)
        {
            ++mismatches;
            if (first.empty())
                first = e.what();
        }
    }
    size_t buffers = 0;
    size_t crashes = 0;
    const Bytes header{0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};
    for (; buffers < 1200; ++buffers)
    {
        Bytes b;
        switch (buffers % 3)
        {
        case 0:
            b = g.bytes(g.below(512));
            break;
        case 1:
            b = header;
            for (const auto x : g.bytes(g.below(512)))
                b.push_back(x);
            break;
        default:
            b = emit_module(g.module());
            for (auto n = b.size() > 8 ? 1 + g.below(8) : 0; n > 0; --n)
                b[8 + g.below(static_cast<uint32_t>(b.size() - 8))] = static_cast<uint8_t>(g.below(256));
            if (g.chance(0.3))
                b.resize(g.below(static_cast<uint32_t>(b.size()) + 1));
        }
        for (const auto mode : {ParseMode::Strict, ParseMode::Prefix})
        {
            try
            {
                const auto m = parse_module(b, mode);
                (void)profile_exports(m);
                (void)dump_structure(m);
            }
            catch (const Error&)
            {
            }
            catch (const std::exception& e)
            {
                ++crashes;
                if (first.empty())
                    first = e.what();
            }
        }
        try
        {
            (void)scan_bytes("fuzz", b, catalogs());
        }
        catch (const Error&)
        {
        }
        catch (const std::exception& e)
        {
            ++crashes;
        }
    }
    const auto ms = ms_since(t0);
    std::ostringstream d;
    d << "specs=" << specs << " mismatches=" << mismatches << " buffers=" << buffers << " untyped_failures=" << crashes
      << " ms=" << ms;
    if (!first.empty())
        d << " first=" << first;
    return {mismatches == 0 && crashes == 0 && ms < 60000.0, d.str()};
}

Outcome reachability_oracle()
{
    test::SpecGenerator g{0xBEEF};
    size_t cases = 0;
    size_t with_indirect = 0;
    size_t failures = 0;
    std::string first;
    for (; cases < 600; ++cases)
    {
        // Half the cases are plain call graphs, half use call_indirect.
        const bool indirect = cases % 2 == 1;
        const auto c = test::random_graph(g, 12, indirect ? 0.5 : 0.0, indirect ? 0.05 : 0.0);
        if (std::any_of(c.indirect.begin(), c.indirect.end(), [](bool b) { return b; }))
            ++with_indirect;
        const auto r = test::check_reachability(c);
        if (!r.ok)
        {
            ++failures;
            if (first.empty())
                first = r.why;
        }
    }
    std::ostringstream d;
    d << "cases=" << cases << " with_call_indirect=" << with_indirect << " failures=" << failures;
    if (!first.empty())
        d << " first=" << first;
    return {failures == 0 && cases >= 500, d.str()};
}

Outcome carver_exactness()
{
    test::SpecGenerator g{0xCA4E};
    size_t planted_total = 0;
    size_t misses = 0;
    size_t inexact = 0;
    const auto check = [&](const std::vector<CarvedCandidate>& found,
                           const std::vector<std::pair<uint64_t, Bytes>>& planted) {
        if (found.size() != planted.size())
            misses += planted.size() > found.size() ? planted.size() - found.size() : found.size() - planted.size();
        for (size_t i = 0; i < std::min(found.size(), planted.size()); ++i)
        {
            if (found[i].offset != planted[i].first)
                ++misses;
            else if (found[i].status != CarveStatus::Parsed || found[i].bytes != planted[i].second ||
                     found[i].length != planted[i].second.size())
                ++inexact;
        }
    };

    for (const auto& [size, k] : std::vector<std::pair<size_t, size_t>>{{64 << 10, 3}, {1 << 20, 8}, {4 << 20, 24}, {16 << 20, 64}})
    {
        auto buf = test::magic_free_filler(g, size);
        std::vector<std::pair<uint64_t, Bytes>> planted;
        const size_t stride = size / k;
        for (size_t i = 0; i < k; ++i)
        {
            auto m = g.plantable_module();
            const uint64_t at = i * stride + g.below(static_cast<uint32_t>(stride - m.size() - 1));
            std::copy(m.begin(), m.end(), buf.begin() + static_cast<std::ptrdiff_t>(at));
            planted.emplace_back(at, std::move(m));
        }
        planted_total += planted.size();
        std::vector<CarvedCandidate> direct;
        for (const auto off : scan_magic(buf))
            direct.push_back(carve(buf, off));
        check(direct, planted);

        if (size == (16u << 20))
        {
            // Same buffer inside an archive entry, scanned whole and in windows.
            const auto inv = open_archive(emit_zip({{"assets/big.bin", buf, kMethodStored, {}}}));
            check(scan_inventory(inv).candidates, planted);
            CarveOptions windowed;
            windowed.stream_threshold = 1 << 20;
            windowed.window = 1 << 20;
            windowed.lookahead = 64 << 10;
            windowed.jobs = 4;
            check(scan_inventory(inv, windowed).candidates, planted);
            planted_total += 2 * planted.size();
        }
    }

    size_t oracle_buffers = 0;
    size_t oracle_mismatch = 0;
    for (; oracle_buffers < 8; ++oracle_buffers)
    {
        auto b = g.bytes(1 << 20);
        for (auto n = g.below(200); n > 0; --n)
        {
            const auto at = g.below(static_cast<uint32_t>(b.size() - 3));
            std::copy(kWasmMagic.begin(), kWasmMagic.end(), b.begin() + at);
        }
        if (scan_magic(b) != test::naive_magic_offsets(b))
            ++oracle_mismatch;
    }
    std::ostringstream d;
    d << "planted=" << planted_total << " misses=" << misses << " inexact=" << inexact
      << " oracle_buffers=" << oracle_buffers << " oracle_mismatch=" << oracle_mismatch;
    return {misses == 0 && inexact == 0 && oracle_mismatch == 0, d.str()};
}

Outcome determinism()
{
    size_t fixtures = 0;
    std::vector<std::string> differing;
    for (const auto& e : fs::directory_iterator(WASMDROID_FIXTURE_DIR))
    {
        if (e.path().extension() != ".json")
            continue;
        ++fixtures;
        const auto name = e.path().stem().string();
        ScanOptions one;
        ScanOptions eight;
        eight.jobs = 8;
        ScanOptions deep8 = eight;
        deep8.deep = true;
        ScanOptions deep1;
        deep1.deep = true;
        const auto a = render_json(timed_scan(name, one).first);
        const auto b = render_json(timed_scan(name, one).first);
        const auto c = render_json(timed_scan(name, eight).first);
        const auto d1 = render_json(timed_scan(name, deep1).first);
        const auto d8 = render_json(timed_scan(name, deep8).first);
        if (a != b || a != c || d1 != d8)
            differing.push_back(name);
    }
    std::ostringstream d;
    d << "fixtures=" << fixtures << " differing=" << differing.size();
    for (const auto& n : differing)
        d << " " << n;
    return {differing.empty() && fixtures > 0, d.str()};
}
}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC1 hidden-ioc-recovery", hidden_ioc_recovery},
        {"AC2 pipeline-coverage-matrix", coverage_matrix},
        {"AC3 ransomware-analog-capability", ransomware_capability},
        {"AC4 parser-round-trip-and-fuzz", parser_round_trip},
        {"AC5 reachability-oracle-equivalence", reachability_oracle},
        {"AC6 carver-exactness", carver_exactness},
        {"AC7 determinism", determinism},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria)
    {
        Outcome o;
        try
        {
            o = fn();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string{"exception: "} + e.what()};
        }
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << "  " << o.detail << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
