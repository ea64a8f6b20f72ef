// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "specs.hpp"
#include <wasmdroid/dex.hpp>
#include <wasmdroid/testkit/emit.hpp>
#include <gtest/gtest.h>

using namespace wasmdroid;
using namespace wasmdroid::testkit;

TEST(Dex, EmptyStringTable)
{
    Bytes b(kDexHeaderSize, 0);
    const char magic[] = "dex\n035";
    std::copy(magic, magic + 8, b.begin());
    b[0x20] = static_cast<uint8_t>(kDexHeaderSize);
    const auto dex = parse_dex(b);
    EXPECT_TRUE(dex.strings.empty());
    EXPECT_EQ(dex.version, "035");
}

TEST(Dex, RecoversFixtureString)
{
    const auto dex = parse_dex(emit_dex_with_strings({"evaluateJavascript"}));
    EXPECT_EQ(dex.strings, std::vector<std::string>{"evaluateJavascript"});
}

TEST(Dex, BadMagic)
{
    try
    {
        parse_dex(to_bytes("PK\x03\x04 and more bytes to look like a header......................"));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::BadDexMagic);
    }
}

TEST(Dex, ShortHeader)
{
    try
    {
        parse_dex(to_bytes(std::string_view{"dex\n035\0", 8}));
        FAIL();
    }
    catch (const Error& e)
    {
        EXPECT_EQ(e.code(), ErrorCode::HeaderOutOfBounds);
    }
}

TEST(Dex, TokenMatching)
{
    const auto dex = parse_dex(emit_dex_with_strings({"createConnectedInstanceAsync"}));
    EXPECT_EQ(dex_strings_matching(dex, {"createConnectedInstanceAsync"}).size(), 1u);

    const auto sub = parse_dex(emit_dex_with_strings({"a", "XevaluateJavascriptY"}));
    const auto hits = dex_strings_matching(sub, {"evaluateJavascript"});
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].string_index, 1u);

    const auto empty = parse_dex(emit_dex_with_strings({}));
    EXPECT_TRUE(dex_strings_matching(empty, {"evaluateJavascript"}).empty());
}

TEST(Dex, Mutf8Specials)
{
    // NUL as C0 80, supplementary code point as a surrogate pair.
    const std::string text{"a\0b\xF0\x9F\x98\x80", 7};
    const auto [encoded, utf16_len] = encode_mutf8(text);
    EXPECT_EQ(utf16_len, 5u);
    EXPECT_EQ(std::count(encoded.begin(), encoded.end(), 0), 0);
    const auto [decoded, ok] = decode_mutf8(encoded);
    EXPECT_TRUE(ok);
    EXPECT_EQ(decoded, text);
}

TEST(Dex, MalformedStringIsReplacedNotFatal)
{
    const auto [decoded, ok] = decode_mutf8(Bytes{'a', 0xFF, 'b'});
    EXPECT_FALSE(ok);
    EXPECT_EQ(decoded, "a\xEF\xBF\xBD" "b");
}

TEST(Dex, StringsRoundTripInOrder)
{
    test::SpecGenerator g{3};
    for (int round = 0; round < 200; ++round)
    {
        std::vector<std::string> strings;
        for (auto n = g.below(20); n > 0; --n)
            strings.push_back(g.name(30));
        const auto dex = parse_dex(emit_dex_with_strings(strings));
        ASSERT_EQ(dex.strings, strings);
        EXPECT_EQ(dex.malformed_strings, 0u);
    }
}

TEST(Dex, PayloadPlacement)
{
    const auto m = emit_module(test::spyware_spec());
    const auto dex = emit_dex({{"x"}, m});
    ASSERT_LE(dex.payload_offset + m.size(), dex.bytes.size());
    EXPECT_TRUE(std::equal(m.begin(), m.end(), dex.bytes.begin() + dex.payload_offset));
    EXPECT_EQ(parse_dex(dex.bytes).strings, std::vector<std::string>{"x"});
}

TEST(Dex, FuzzNeverReadsOutside)
{
    test::SpecGenerator g{17};
    const auto valid = emit_dex_with_strings({"evaluateJavascript", "loadUrl", "abc"});
    for (int i = 0; i < 3000; ++i)
    {
        Bytes b = valid;
        for (auto n = 1 + g.below(6); n > 0; --n)
            b[g.below(static_cast<uint32_t>(b.size()))] = static_cast<uint8_t>(g.below(256));
        b.resize(g.below(static_cast<uint32_t>(b.size()) + 1));
        try
        {
            const auto dex = parse_dex(b);
            EXPECT_EQ(dex.strings.size(), dex.string_count);
        }
        catch (const Error&)
        {
        }
    }
}
