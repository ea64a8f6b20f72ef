// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "specs.hpp"
#include <wasmdroid/indicators.hpp>
#include <wasmdroid/testkit/emit.hpp>
#include <gtest/gtest.h>

using namespace wasmdroid;
using namespace wasmdroid::testkit;

namespace
{
const IndicatorCatalog& cat()
{
    return IndicatorCatalog::builtin();
}

bool has_id(const std::vector<Indicator>& v, std::string_view id)
{
    return std::any_of(v.begin(), v.end(), [&](const Indicator& i) { return i.id == id; });
}

Bytes nul_strings(const std::vector<std::string>& strings)
{
    Bytes b{0x7F, 'E', 'L', 'F', 0};
    for (const auto& s : strings)
    {
        b.insert(b.end(), s.begin(), s.end());
        b.push_back(0);
    }
    return b;
}
}  // namespace

TEST(Indicators, CatalogCoversAllDetectionPoints)
{
    std::set<DetectionPoint> points;
    for (const auto& e : cat().entries())
        points.insert(e.detection_point());
    for (const auto p : {DetectionPoint::WasmFiles, DetectionPoint::ByteArrays, DetectionPoint::NativeRuntime,
             DetectionPoint::JavaApi})
        EXPECT_TRUE(points.count(p)) << to_string(p);
}

TEST(Indicators, CatalogFailsClosed)
{
    EXPECT_THROW(IndicatorCatalog::parse("a\tGeneric\tInfo\tToken\tx\na\tGeneric\tInfo\tToken\ty\n"), Error);
    EXPECT_THROW(IndicatorCatalog::parse("a\tNoSuchChannel\tInfo\tToken\tx\n"), Error);
    EXPECT_THROW(IndicatorCatalog::parse("a\tGeneric\tLoud\tToken\tx\n"), Error);
    EXPECT_THROW(IndicatorCatalog::parse("a\tGeneric\tInfo\tByteSignature\tzz\n"), Error);
    EXPECT_THROW(IndicatorCatalog::parse("a\tGeneric\tInfo\tBuiltin\tno-such-event\n"), Error);
    EXPECT_THROW(IndicatorCatalog::parse("a\tGeneric\tInfo\n"), Error);
    EXPECT_NO_THROW(IndicatorCatalog::parse("# only a comment\n"));
}

TEST(Indicators, RuntimeLibPath)
{
    const auto inv = open_archive(emit_zip({{"lib/arm64-v8a/libwasmedge.so", nul_strings({}), kMethodDeflate, {}}}));
    const auto found = scan_paths(cat(), inv);
    ASSERT_TRUE(has_id(found, "runtime-wasmedge-lib"));
    const auto it = std::find_if(found.begin(), found.end(), [](const Indicator& i) { return i.id == "runtime-wasmedge-lib"; });
    EXPECT_EQ(it->severity, Severity::Strong);
    EXPECT_EQ(it->channel, Channel::NativeRuntime);
}

TEST(Indicators, DexTokenJsEngine)
{
    const auto dex = parse_dex(emit_dex_with_strings({"createConnectedInstanceAsync"}));
    const auto found = scan_dex_tokens(cat(), "classes.dex", 0, dex);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].id, "jsengine-create-connected");
    EXPECT_EQ(found[0].channel, Channel::JsEngine);
    EXPECT_EQ(found[0].locus, LocusKind::StringIndex);
    EXPECT_EQ(found[0].position, 0u);
}

TEST(Indicators, HtmlTokenWebView)
{
    const std::string html = "<script>WebAssembly.instantiate(bytes,{})</script>";
    const auto found = scan_text_tokens(cat(), "assets/index.html", 0, as_bytes(html));
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].id, "webview-wasm-instantiate");
    EXPECT_EQ(found[0].channel, Channel::WebView);
    EXPECT_EQ(found[0].position, html.find("WebAssembly"));
}

TEST(Indicators, JniBridges)
{
    const auto one = jni_wasm_bridges(nul_strings({"Java_org_wasmedge_native_1lib_NativeLib_nativeWasmFibonacci"}));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].evidence, "Java_org_wasmedge_native_1lib_NativeLib_nativeWasmFibonacci");
    EXPECT_EQ(one[0].channel, Channel::NativeRuntime);
    EXPECT_EQ(one[0].severity, Severity::Suspicious);

    EXPECT_TRUE(jni_wasm_bridges(nul_strings({"Java_com_example_Foo_bar"})).empty());

    const auto two = jni_wasm_bridges(nul_strings({"Java_a_B_runWasm", "unrelated", "Java_c_D_loadWASM"}));
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NE(two[0].position, two[1].position);
}

TEST(Indicators, NativeSymbols)
{
    const auto blob = nul_strings({"WasmEdge_VMRunWasmFromBuffer", "x", "WasmEdge_ModuleInstanceAddFunction"});
    const auto found = scan_native_symbols(cat(), "lib/x86/libapp.so", 0, blob);
    EXPECT_TRUE(has_id(found, "wasmedge-run-from-buffer"));
    EXPECT_TRUE(has_id(found, "wasmedge-add-host-function"));
    EXPECT_FALSE(has_id(found, "wasmedge-host-registration"));
}

TEST(Indicators, WindowPrimaryLimitsReports)
{
    const auto blob = nul_strings({"aaaaaaaa", "WasmEdge_VMRunWasmFromBuffer"});
    EXPECT_TRUE(scan_native_symbols(cat(), "l.so", 0, blob, 1000, 4).empty());
    const auto found = scan_native_symbols(cat(), "l.so", 0, blob, 1000);
    ASSERT_FALSE(found.empty());
    EXPECT_GE(found[0].position, 1000u);
}

TEST(Indicators, ByteSignature)
{
    Bytes b(10, 0x11);
    const auto m = emit_module({});
    b.insert(b.end(), m.begin(), m.end());
    const auto found = scan_byte_signatures(cat(), "classes.dex", 0, b);
    ASSERT_EQ(found.size(), 1u);
    EXPECT_EQ(found[0].id, "wasm-signature-bytes");
    EXPECT_EQ(found[0].position, 10u);
}

TEST(Indicators, DuplicateEntryAndMalformedDex)
{
    const auto inv = open_archive(emit_zip({{"classes.dex", to_bytes("a"), kMethodStored, {}},
        {"classes.dex", to_bytes("b"), kMethodStored, {}}}));
    EXPECT_TRUE(has_id(scan_paths(cat(), inv), "duplicate-entry"));

    auto dex_bytes = emit_dex_with_strings({"abcdef"});
    const auto pos = std::search(dex_bytes.begin(), dex_bytes.end(), std::begin("abcdef"), std::end("abcdef") - 1);
    *(pos + 2) = 0xFF;
    const auto dex = parse_dex(dex_bytes);
    EXPECT_EQ(dex.malformed_strings, 1u);
    EXPECT_TRUE(has_id(scan_dex_tokens(cat(), "classes.dex", 0, dex), "malformed-dex-string"));
}

TEST(Indicators, StrongCappedWithoutModuleOrRuntime)
{
    std::vector<Indicator> v{{"wasmedge-run-from-buffer", Severity::Strong, Channel::NativeRuntime, "l.so", 0,
        LocusKind::Offset, 5, "WasmEdge_VMRunWasmFromBuffer"}};
    auto capped = v;
    finalize_indicators(capped, cat(), false);
    EXPECT_EQ(capped[0].severity, Severity::Suspicious);
    auto kept = v;
    finalize_indicators(kept, cat(), true);
    EXPECT_EQ(kept[0].severity, Severity::Strong);
}

TEST(Indicators, FinalizeSortsAndDedups)
{
    Indicator a{"b-id", Severity::Info, Channel::Generic, "p", 0, LocusKind::Offset, 2, "e"};
    Indicator b{"a-id", Severity::Info, Channel::Generic, "p", 0, LocusKind::Offset, 9, "e"};
    std::vector<Indicator> v{a, b, a};
    finalize_indicators(v, cat(), true);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v[0].id, "a-id");
}

TEST(Indicators, Deterministic)
{
    const auto inv = open_archive(emit_zip({{"lib/arm64-v8a/libwasmer.so", nul_strings({"wasmer_instance_new"}), kMethodDeflate, {}},
        {"assets/a.wasm", emit_module(test::spyware_spec()), kMethodStored, {}},
        {"assets/b.js", to_bytes("WebAssembly.compile(x); WebAssembly.compile(y)"), kMethodDeflate, {}}}));
    std::vector<std::vector<Indicator>> runs;
    for (int i = 0; i < 3; ++i)
    {
        const auto lib = entry_bytes(inv, size_t{0}).bytes;
        const auto js = entry_bytes(inv, size_t{2}).bytes;
        runs.push_back(scan_indicators(cat(), inv, {}, {{2, js}}, {{0, lib}}, {}, {}));
    }
    EXPECT_EQ(runs[0], runs[1]);
    EXPECT_EQ(runs[1], runs[2]);
    EXPECT_TRUE(has_id(runs[0], "wasm-file"));
    EXPECT_TRUE(has_id(runs[0], "wasmer-symbol"));
    EXPECT_TRUE(has_id(runs[0], "runtime-wasmer-lib"));
}
