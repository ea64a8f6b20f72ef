// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "specs.hpp"
#include <wasmdroid/scan.hpp>
#include <wasmdroid/testkit/manifest.hpp>
#include <gtest/gtest.h>
#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace wasmdroid;
namespace fs = std::filesystem;

namespace
{
testkit::Fixture fixture(const std::string& name)
{
    return testkit::load_fixture(std::string{WASMDROID_FIXTURE_DIR} + "/" + name + ".json");
}

ScanReport scan_fixture(const std::string& name, const ScanOptions& opts = {})
{
    auto f = fixture(name);
    return scan_bytes(name, std::move(f.bytes), Catalogs::builtin(), opts).report;
}

bool has_indicator(const ScanReport& r, std::string_view id)
{
    return std::any_of(r.indicators.begin(), r.indicators.end(), [&](const auto& i) { return i.id == id; });
}
}  // namespace

TEST(Scan, SpywareEndToEnd)
{
    const auto r = scan_fixture("spyware-analog");
    ASSERT_EQ(r.wasm_modules.size(), 1u);
    const auto& m = r.wasm_modules[0];
    EXPECT_EQ(m.source, "classes.dex");
    EXPECT_EQ(m.status, "Parsed");
    ASSERT_EQ(m.iocs.size(), 1u);
    EXPECT_EQ(m.iocs[0].kind, "Url");
    EXPECT_EQ(m.iocs[0].value, test::kSpywareUrl);
    ASSERT_EQ(m.capabilities.size(), 1u);
    EXPECT_EQ(m.capabilities[0].export_name, "run");
    EXPECT_EQ(m.capabilities[0].categories, std::vector<std::string>{"HostCustom"});
    EXPECT_EQ(m.capabilities[0].soundness, "Exact");
    EXPECT_EQ(r.verdict, "LikelyMaliciousHiding");
}

TEST(Scan, RansomwareCapabilityAndPreopen)
{
    const auto r = scan_fixture("ransomware-analog");
    ASSERT_FALSE(r.wasm_modules.empty());
    const auto& caps = r.wasm_modules[0].capabilities.at(0).categories;
    EXPECT_NE(std::find(caps.begin(), caps.end(), "WasiFilesystem"), caps.end());
    const bool preopen = std::any_of(r.host_iocs.begin(), r.host_iocs.end(),
        [](const HostIocRecord& h) { return h.kind == "PreopenMapping" && h.value.starts_with("/input:"); });
    EXPECT_TRUE(preopen);
}

TEST(Scan, StegoPngModuleRecovered)
{
    const auto r = scan_fixture("stego-png");
    ASSERT_EQ(r.wasm_modules.size(), 1u);
    EXPECT_EQ(r.wasm_modules[0].source_class, "Resource");
    EXPECT_EQ(r.wasm_modules[0].offset, 4096u);
    EXPECT_FALSE(r.wasm_modules[0].exports.empty());
}

TEST(Scan, CoverageMatrixIndicators)
{
    EXPECT_TRUE(has_indicator(scan_fixture("coverage-wasm-file"), "wasm-file"));
    EXPECT_TRUE(has_indicator(scan_fixture("coverage-dex-bytearray"), "wasm-signature-bytes"));
    const auto native = scan_fixture("coverage-native-runtime");
    EXPECT_TRUE(has_indicator(native, "runtime-wasmedge-lib"));
    EXPECT_TRUE(has_indicator(native, "wasmedge-run-from-buffer"));
    const auto java = scan_fixture("coverage-java-api");
    EXPECT_TRUE(has_indicator(java, "webview-evaluate-javascript"));
    EXPECT_TRUE(has_indicator(java, "webview-wasm-instantiate"));
}

TEST(Scan, JobsDoNotChangeReport)
{
    for (const auto* name : {"spyware-analog", "ransomware-analog", "stego-png", "coverage-native-runtime"})
    {
        ScanOptions one;
        ScanOptions eight;
        eight.jobs = 8;
        EXPECT_EQ(render_json(scan_fixture(name, one)), render_json(scan_fixture(name, eight))) << name;
    }
}

TEST(Scan, DeepFindsSegmentIocsToo)
{
    ScanOptions deep;
    deep.deep = true;
    const auto r = scan_fixture("spyware-analog", deep);
    const auto& iocs = r.wasm_modules.at(0).iocs;
    EXPECT_TRUE(std::any_of(iocs.begin(), iocs.end(), [](const IocRecord& i) { return i.value == test::kSpywareUrl; }));
}

TEST(Scan, BareWasm)
{
    const auto r = scan_fixture("module-exports-only");
    EXPECT_EQ(r.target_kind, "wasm");
    EXPECT_EQ(r.verdict, "WasmPresent");
    ASSERT_EQ(r.wasm_modules.size(), 1u);
    EXPECT_EQ(r.wasm_modules[0].status, "Parsed");
}

TEST(Scan, CatalogDigestsEmbedded)
{
    const auto r = scan_fixture("clean");
    for (const auto* key : {"capabilities", "indicators", "ioc_patterns", "weights"})
        EXPECT_EQ(r.catalog_digests.count(key), 1u) << key;
}

TEST(Scan, CatalogDirOverride)
{
    const auto dir = fs::temp_directory_path() / "wasmdroid_catalog_override";
    fs::create_directories(dir);
    {
        std::ofstream(dir / "weights.tsv") << "weight\tparsed-module\t30\n"
                                              "threshold\tWasmPresent\t3\n"
                                              "threshold\tSuspiciousHiding\t8\n"
                                              "threshold\tLikelyMaliciousHiding\t15\n";
    }
    const auto cats = Catalogs::load(dir, std::nullopt, std::nullopt);
    EXPECT_EQ(cats.weights.weight("parsed-module"), 30u);
    EXPECT_EQ(cats.indicators.digest(), Catalogs::builtin().indicators.digest());
    auto f = fixture("module-exports-only");
    EXPECT_EQ(scan_bytes("m", std::move(f.bytes), cats).report.verdict, "LikelyMaliciousHiding");
    fs::remove_all(dir);
}

TEST(Scan, GarbageInputIsTypedError)
{
    try
    {
        scan_bytes("junk", to_bytes("definitely not an archive"), Catalogs::builtin());
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::NotAZip);
    }
}
