// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"
#include <wasmdroid/carver.hpp>
#include <wasmdroid/testkit/emit.hpp>
#include <gtest/gtest.h>

using namespace wasmdroid;
using namespace wasmdroid::testkit;

namespace
{
const Bytes kHeader{0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};

Bytes plant(Bytes host, size_t at, const Bytes& module)
{
    std::copy(module.begin(), module.end(), host.begin() + static_cast<std::ptrdiff_t>(at));
    return host;
}
}  // namespace

TEST(Carver, ScanMagicBasics)
{
    EXPECT_TRUE(scan_magic({}).empty());
    Bytes b{0xDE, 0xAD, 0xBE, 0xEF};
    b.insert(b.end(), kHeader.begin(), kHeader.end());
    EXPECT_EQ(scan_magic(b), std::vector<uint64_t>{4});
}

TEST(Carver, MagicInDexStringData)
{
    const auto module = emit_module(test::spyware_spec());
    const auto dex = emit_dex({{"evaluateJavascript"}, module});
    EXPECT_EQ(scan_magic(dex.bytes), std::vector<uint64_t>{dex.payload_offset});
}

TEST(Carver, EmptyModuleParsesToEightBytes)
{
    auto b = kHeader;
    b.push_back(0xFF);
    const auto c = carve(b, 0);
    EXPECT_EQ(c.status, CarveStatus::Parsed);
    EXPECT_EQ(c.length, 8u);
    ASSERT_TRUE(c.module.has_value());
    EXPECT_TRUE(c.module->sections.empty());
    EXPECT_EQ(c.bytes, kHeader);
}

TEST(Carver, WrongVersionIsMagicOnly)
{
    const Bytes b{0x00, 0x61, 0x73, 0x6D, 0x02, 0x00, 0x00, 0x00};
    const auto c = carve(b, 0);
    EXPECT_EQ(c.status, CarveStatus::MagicOnly);
    EXPECT_EQ(c.length, 0u);
    EXPECT_FALSE(c.module.has_value());
    EXPECT_FALSE(c.failure.empty());
}

TEST(Carver, MagicAtEndNeverReadsPast)
{
    const Bytes b{0x01, 0x00, 0x61, 0x73, 0x6D};
    const auto c = carve(b, 1);
    EXPECT_EQ(c.status, CarveStatus::MagicOnly);
}

TEST(Carver, ModuleInsidePngAsset)
{
    test::SpecGenerator g{8};
    auto png = test::magic_free_filler(g, 8192);
    const auto module = emit_module(test::spyware_spec());
    png = plant(png, 4096, module);
    const auto inv = open_archive(emit_zip({{"res/drawable/logo.png", png, kMethodDeflate, {}}}));
    const auto r = scan_inventory(inv);
    ASSERT_EQ(r.candidates.size(), 1u);
    const auto& c = r.candidates[0];
    EXPECT_EQ(c.source_class, FileClass::Resource);
    EXPECT_EQ(c.offset, 4096u);
    EXPECT_EQ(c.status, CarveStatus::Parsed);
    EXPECT_EQ(c.bytes, module);
    std::string why;
    EXPECT_TRUE(matches_spec(test::spyware_spec(), *c.module, &why)) << why;
}

TEST(Carver, WasmAssetAtOffsetZero)
{
    const auto module = emit_module(test::spyware_spec());
    const auto inv = open_archive(emit_zip({{"assets/wasm/fibonacci.wasm", module, kMethodDeflate, {}}}));
    const auto r = scan_inventory(inv);
    ASSERT_EQ(r.candidates.size(), 1u);
    EXPECT_EQ(r.candidates[0].offset, 0u);
    EXPECT_EQ(r.candidates[0].status, CarveStatus::Parsed);
    EXPECT_EQ(r.candidates[0].source_class, FileClass::WasmFile);
}

TEST(Carver, NoMagicNoCandidates)
{
    const auto inv = open_archive(emit_zip({{"AndroidManifest.xml", to_bytes("<manifest/>"), kMethodDeflate, {}},
        {"classes.dex", emit_dex_with_strings({"a", "b"}), kMethodDeflate, {}}}));
    EXPECT_TRUE(scan_inventory(inv).candidates.empty());
}

TEST(Carver, ModuleInsideClassesDex)
{
    const auto dex = emit_dex({{"x"}, emit_module(test::spyware_spec())});
    const auto inv = open_archive(emit_zip({{"classes.dex", dex.bytes, kMethodDeflate, {}}}));
    const auto r = scan_inventory(inv);
    ASSERT_EQ(r.candidates.size(), 1u);
    EXPECT_EQ(r.candidates[0].source_path, "classes.dex");
    EXPECT_EQ(r.candidates[0].offset, dex.payload_offset);
    EXPECT_GT(r.candidates[0].offset, 0u);
    EXPECT_EQ(r.candidates[0].status, CarveStatus::Parsed);
}

TEST(Carver, ScanMagicMatchesSlidingWindow)
{
    test::SpecGenerator g{1};
    for (int round = 0; round < 40; ++round)
    {
        auto b = g.bytes(g.below(1u << 16));
        for (auto n = g.below(20); n > 0 && b.size() >= 4; --n)
        {
            const auto at = g.below(static_cast<uint32_t>(b.size() - 3));
            std::copy(kWasmMagic.begin(), kWasmMagic.end(), b.begin() + at);
        }
        ASSERT_EQ(scan_magic(b), test::naive_magic_offsets(b));
    }
}

TEST(Carver, PlantedModulesFoundExactly)
{
    test::SpecGenerator g{12};
    for (int round = 0; round < 20; ++round)
    {
        auto buf = test::magic_free_filler(g, 200000);
        std::vector<std::pair<uint64_t, Bytes>> planted;
        uint64_t cursor = g.below(1000);
        for (auto k = 1 + g.below(8); k > 0; --k)
        {
            auto m = g.plantable_module();
            if (cursor + m.size() > buf.size())
                break;
            buf = plant(buf, cursor, m);
            planted.emplace_back(cursor, std::move(m));
            cursor += planted.back().second.size() + 1 + g.below(5000);
        }
        const auto offsets = scan_magic(buf);
        ASSERT_EQ(offsets.size(), planted.size());
        for (size_t i = 0; i < planted.size(); ++i)
        {
            ASSERT_EQ(offsets[i], planted[i].first);
            const auto c = carve(buf, offsets[i]);
            ASSERT_EQ(c.status, CarveStatus::Parsed);
            EXPECT_EQ(c.length, planted[i].second.size());
            EXPECT_EQ(c.bytes, planted[i].second);
        }
    }
}

TEST(Carver, WindowedScanFindsStraddlingModule)
{
    test::SpecGenerator g{21};
    auto buf = test::magic_free_filler(g, 300000);
    const auto module = emit_module(test::ransomware_spec());
    const size_t window = 64 * 1024;
    // Straddle the first window boundary, magic split across it.
    buf = plant(buf, window - 2, module);
    buf = plant(buf, 200000, module);
    const auto inv = open_archive(emit_zip({{"assets/big.bin", buf, kMethodDeflate, {}}}));

    CarveOptions small;
    small.stream_threshold = 100000;
    small.window = window;
    small.lookahead = 4096;
    const auto windowed = scan_inventory(inv, small);
    const auto whole = scan_inventory(inv);
    ASSERT_EQ(windowed.candidates.size(), 2u);
    ASSERT_EQ(whole.candidates.size(), 2u);
    for (size_t i = 0; i < 2; ++i)
    {
        EXPECT_EQ(windowed.candidates[i].offset, whole.candidates[i].offset);
        EXPECT_EQ(windowed.candidates[i].bytes, module);
    }
    EXPECT_EQ(windowed.candidates[0].offset, window - 2);
}

TEST(Carver, ParallelMatchesSerial)
{
    test::SpecGenerator g{4};
    std::vector<ZipEntrySpec> entries;
    for (int i = 0; i < 12; ++i)
    {
        auto b = test::magic_free_filler(g, 5000);
        b = plant(b, 100 + static_cast<size_t>(i) * 10, emit_module(test::spyware_spec()));
        entries.push_back({"assets/e" + std::to_string(i), b, kMethodDeflate, {}});
    }
    const auto inv = open_archive(emit_zip(entries));
    CarveOptions par;
    par.jobs = 8;
    const auto a = scan_inventory(inv);
    const auto b = scan_inventory(inv, par);
    ASSERT_EQ(a.candidates.size(), b.candidates.size());
    for (size_t i = 0; i < a.candidates.size(); ++i)
    {
        EXPECT_EQ(a.candidates[i].source_path, b.candidates[i].source_path);
        EXPECT_EQ(a.candidates[i].offset, b.candidates[i].offset);
        EXPECT_EQ(a.candidates[i].bytes, b.candidates[i].bytes);
    }
}
