// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "specs.hpp"
#include <wasmdroid/ioc.hpp>
#include <gtest/gtest.h>

using namespace wasmdroid;
using namespace wasmdroid::testkit;

namespace
{
WasmModule with_segments(std::vector<DataSpec> data)
{
    ModuleSpec s;
    s.data = std::move(data);
    return parse_module(emit_module(s));
}

std::vector<IocHit> hits_in(std::string_view text)
{
    ExtractedString s{std::string{text}, {}, text.size()};
    return IocPatternSet::builtin().match(s);
}
}  // namespace

TEST(Ioc, UrlSegmentIsOneString)
{
    const auto m = with_segments({{1024u, to_bytes(test::kSpywareUrl)}});
    const auto strings = extract_strings(m, kDefaultMinStringLength, ExtractMode::SegmentsOnly);
    ASSERT_EQ(strings.size(), 1u);
    EXPECT_EQ(strings[0].text, test::kSpywareUrl);
    EXPECT_EQ(strings[0].length, 38u);
    EXPECT_EQ(strings[0].source.origin, StringOrigin::DataSegment);
    EXPECT_EQ(strings[0].source.memory_addr, 1024u);
}

TEST(Ioc, ZeroSegmentHasNoStrings)
{
    const auto m = with_segments({{0u, Bytes(64, 0)}});
    EXPECT_TRUE(extract_strings(m, kDefaultMinStringLength, ExtractMode::SegmentsOnly).empty());
}

TEST(Ioc, TwoRunsSplitByNul)
{
    const auto m = with_segments({{100u, to_bytes(std::string{"first_run\0second_run", 20})}});
    const auto strings = extract_strings(m, kDefaultMinStringLength, ExtractMode::SegmentsOnly);
    ASSERT_EQ(strings.size(), 2u);
    EXPECT_EQ(strings[0].text, "first_run");
    EXPECT_EQ(strings[0].source.offset, 0u);
    EXPECT_EQ(strings[1].text, "second_run");
    EXPECT_EQ(strings[1].source.offset, 10u);
    EXPECT_EQ(strings[1].source.memory_addr, 110u);
}

TEST(Ioc, MinLengthAndUtf8)
{
    const auto runs = printable_runs(as_bytes("ab\x01" "caf\xC3\xA9s!\x02"), 6, {});
    ASSERT_EQ(runs.size(), 1u);
    EXPECT_EQ(runs[0].text, "caf\xC3\xA9s!");
    EXPECT_EQ(runs[0].length, 6u);
}

TEST(Ioc, PatternExamples)
{
    const auto url = hits_in(test::kSpywareUrl);
    ASSERT_EQ(url.size(), 1u);
    EXPECT_EQ(url[0].kind, IocKind::Url);
    EXPECT_EQ(url[0].value, test::kSpywareUrl);

    const auto pre = hits_in("/input:/data/user/0/app/files");
    ASSERT_EQ(pre.size(), 1u);
    EXPECT_EQ(pre[0].kind, IocKind::PreopenMapping);
    EXPECT_EQ(pre[0].value, "/input:/data/user/0/app/files");

    EXPECT_TRUE(hits_in("hello world constant").empty());
}

TEST(Ioc, OtherKinds)
{
    const auto ip = hits_in("connect 10.0.0.255 now");
    ASSERT_EQ(ip.size(), 1u);
    EXPECT_EQ(ip[0].kind, IocKind::Ipv4);
    EXPECT_TRUE(hits_in("version 1.2.3.256").empty());

    const auto dom = hits_in("beacon to tracker.example.org soon");
    ASSERT_EQ(dom.size(), 1u);
    EXPECT_EQ(dom[0].kind, IocKind::Domain);
    EXPECT_EQ(dom[0].value, "tracker.example.org");
    EXPECT_TRUE(hits_in("localhost").empty());

    const auto path = hits_in("open /input/data.txt");
    ASSERT_EQ(path.size(), 1u);
    EXPECT_EQ(path[0].kind, IocKind::UnixPath);
    EXPECT_TRUE(hits_in("ratio a/b").empty());
}

TEST(Ioc, UrlSuppressesDomainAndPath)
{
    const auto hits = hits_in("see https://cdn.example.com/a/b.wasm and more");
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].kind, IocKind::Url);
}

TEST(Ioc, HitsAreSubstrings)
{
    test::SpecGenerator g{31};
    for (int i = 0; i < 200; ++i)
    {
        std::string text = g.name(8) + " http://" + g.name(6, false) + ".com/" + g.name(4) + " /" + g.name(5) + "/" +
                           g.name(5) + " 192.168." + std::to_string(g.below(300)) + ".1";
        ExtractedString s{text, {}, text.size()};
        for (const auto& h : IocPatternSet::builtin().match(s))
            EXPECT_NE(text.find(h.value), std::string::npos) << h.value;
    }
}

TEST(Ioc, PlantedUrlsCountedExactly)
{
    test::SpecGenerator g{88};
    for (int round = 0; round < 100; ++round)
    {
        std::set<std::string> urls;
        std::vector<DataSpec> data;
        const auto n = 1 + g.below(4);
        uint32_t addr = 0;
        for (uint32_t i = 0; i < n; ++i)
        {
            const auto url = "https://" + g.name(8, false) + std::to_string(round) + "x" + std::to_string(i) + ".example.net/p";
            urls.insert(url);
            Bytes seg = g.bytes(g.below(8));
            for (auto& b : seg)
                b &= 0x1F;  // control bytes keep runs apart
            const auto u = to_bytes(url);
            seg.push_back(0);
            seg.insert(seg.end(), u.begin(), u.end());
            seg.push_back(0);
            data.push_back({addr, seg});
            addr += 4096;
        }
        const auto hits = match_iocs(extract_strings(with_segments(data), 6, ExtractMode::SegmentsOnly));
        std::multiset<std::string> got;
        for (const auto& h : hits)
            if (h.kind == IocKind::Url)
                got.insert(h.value);
        EXPECT_EQ(got.size(), urls.size());
        EXPECT_EQ(std::set<std::string>(got.begin(), got.end()), urls);
    }
}

TEST(Ioc, WholeBinaryIsSuperset)
{
    test::SpecGenerator g{13};
    for (int i = 0; i < 150; ++i)
    {
        auto spec = g.module();
        spec.data.push_back({g.chance(0.5) ? std::optional<uint32_t>{64u} : std::nullopt,
            to_bytes("x http://a" + std::to_string(i) + ".example.com/z /in:/data/app")});
        spec.imports.push_back({"env", "connect_10.1.2.3_example.org", {}});
        const auto bytes = emit_module(spec);
        const auto m = parse_module(bytes);
        const auto seg = match_iocs(extract_strings(m, 6, ExtractMode::SegmentsOnly));
        const auto whole = match_iocs(extract_strings(m, 6, ExtractMode::WholeBinary, bytes));
        for (const auto& h : seg)
        {
            const bool found = std::any_of(whole.begin(), whole.end(), [&](const IocHit& w) {
                return w.kind == h.kind && w.value == h.value && w.source == h.source;
            });
            EXPECT_TRUE(found) << h.value;
        }
        EXPECT_GE(whole.size(), seg.size());
    }
}

TEST(Ioc, PatternTableFailsClosed)
{
    EXPECT_THROW(IocPatternSet::parse("Bogus\tabc\n"), Error);
    EXPECT_THROW(IocPatternSet::parse("Url\t(unclosed\n"), Error);
    const auto custom = IocPatternSet::parse("Domain\tevil\\.test\n");
    ExtractedString s{"go to evil.test", {}, 15};
    EXPECT_EQ(custom.match(s).size(), 1u);
}
