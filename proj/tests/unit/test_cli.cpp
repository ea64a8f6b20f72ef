// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "specs.hpp"
#include <wasmdroid/cli.hpp>
#include <wasmdroid/scan.hpp>
#include <wasmdroid/testkit/manifest.hpp>
#include <gtest/gtest.h>
#include <sys/wait.h>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace wasmdroid;
namespace fs = std::filesystem;

namespace
{
struct Outcome
{
    int exit_code = -1;
    std::string out;
};

Outcome run_cli(const std::string& args)
{
    const std::string cmd = std::string{WASMDROID_CLI} + " " + args + " 2>/dev/null";
    Outcome o;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return o;
    std::array<char, 4096> buf{};
    size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0)
        o.out.append(buf.data(), n);
    const int status = pclose(p);
    o.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

class CliTest : public ::testing::Test
{
protected:
    static void SetUpTestSuite()
    {
        dir = fs::temp_directory_path() / ("wasmdroid_cli_" + std::to_string(::getpid()));
        fs::remove_all(dir);
        fs::create_directories(dir / "corpus");
        for (const auto& e : fs::directory_iterator(WASMDROID_FIXTURE_DIR))
        {
            if (e.path().extension() != ".json")
                continue;
            const auto f = testkit::load_fixture(e.path());
            std::ofstream(dir / "corpus" / (f.name + "." + f.kind), std::ios::binary)
                .write(reinterpret_cast<const char*>(f.bytes.data()), static_cast<std::streamsize>(f.bytes.size()));
        }
    }
    static void TearDownTestSuite() { fs::remove_all(dir); }

    static std::string fixture(const std::string& file) { return (dir / "corpus" / file).string(); }

    static inline fs::path dir;
};
}  // namespace

TEST(CliMapping, ExitCodes)
{
    EXPECT_EQ(exit_code_for(Verdict::Clean), 0);
    EXPECT_EQ(exit_code_for(Verdict::WasmPresent), 2);
    EXPECT_EQ(exit_code_for(Verdict::SuspiciousHiding), 3);
    EXPECT_EQ(exit_code_for(Verdict::LikelyMaliciousHiding), 4);
}

TEST_F(CliTest, CleanExitsZero)
{
    EXPECT_EQ(run_cli("scan " + fixture("clean.apk")).exit_code, 0);
}

TEST_F(CliTest, SpywareExitsFourWithUrl)
{
    const auto o = run_cli("scan " + fixture("spyware-analog.apk"));
    EXPECT_EQ(o.exit_code, 4);
    EXPECT_NE(o.out.find(test::kSpywareUrl), std::string::npos);
}

TEST_F(CliTest, BareModuleExitsTwo)
{
    EXPECT_EQ(run_cli("scan " + fixture("module-exports-only.wasm")).exit_code, 2);
}

TEST_F(CliTest, ExitCodeIsMaxVerdictAcrossInputs)
{
    for (const auto& e : fs::directory_iterator(dir / "corpus"))
    {
        const auto single = run_cli("scan " + e.path().string());
        const auto report = parse_report_json(single.out);
        EXPECT_EQ(single.exit_code, exit_code_for(*verdict_from_string(report.verdict))) << e.path();
    }
    const auto pair = run_cli("scan " + fixture("clean.apk") + " " + fixture("coverage-wasm-file.apk"));
    EXPECT_EQ(pair.exit_code, 2);
    EXPECT_TRUE(fs::exists(fixture("clean.apk") + ".wasmdroid.json"));
    EXPECT_NE(pair.out.find("WasmPresent"), std::string::npos);
    const auto all = run_cli("scan " + (dir / "corpus").string());
    EXPECT_EQ(all.exit_code, 4);
    for (const auto& e : fs::directory_iterator(dir / "corpus"))
        if (e.path().string().ends_with(".wasmdroid.json"))
            fs::remove(e.path());
}

TEST_F(CliTest, OneFailedInputIsNotFatal)
{
    const auto missing = (dir / "nope.apk").string();
    EXPECT_EQ(run_cli("scan " + missing).exit_code, 1);
    EXPECT_EQ(run_cli("scan " + missing + " " + fixture("coverage-wasm-file.apk")).exit_code, 2);
    fs::remove(fixture("coverage-wasm-file.apk") + ".wasmdroid.json");
}

TEST_F(CliTest, JobsByteIdentical)
{
    for (const auto* name : {"spyware-analog.apk", "ransomware-analog.apk", "stego-png.apk"})
    {
        const auto one = run_cli("scan --jobs 1 " + fixture(name));
        const auto eight = run_cli("scan --jobs 8 " + fixture(name));
        EXPECT_EQ(one.out, eight.out) << name;
        EXPECT_EQ(one.out, run_cli("scan " + fixture(name)).out) << name;
    }
}

TEST_F(CliTest, TextFormat)
{
    const auto o = run_cli("scan --format text " + fixture("spyware-analog.apk"));
    EXPECT_EQ(o.exit_code, 4);
    EXPECT_NE(o.out.find("verdict  LikelyMaliciousHiding"), std::string::npos);
}

TEST_F(CliTest, ExtractOutIsBitExact)
{
    const auto out_dir = dir / "extracted";
    const auto o = run_cli("scan --extract-out " + out_dir.string() + " " + fixture("stego-png.apk"));
    EXPECT_EQ(o.exit_code, 4);
    const auto report = parse_report_json(o.out);
    ASSERT_EQ(report.wasm_modules.size(), 1u);
    const auto file = out_dir / report.wasm_modules[0].extract_name;
    ASSERT_TRUE(fs::exists(file)) << file;
    const auto bytes = read_file(file);
    EXPECT_EQ(bytes.size(), report.wasm_modules[0].length);
    EXPECT_EQ(sha256_hex(bytes), report.wasm_modules[0].sha256);
    EXPECT_EQ(parse_module(bytes).exports.size(), report.wasm_modules[0].exports.size());
}

TEST_F(CliTest, DumpSubcommand)
{
    const auto o = run_cli("dump " + fixture("module-exports-only.wasm"));
    EXPECT_EQ(o.exit_code, 0);
    EXPECT_TRUE(o.out.starts_with("module version=1"));
}

TEST_F(CliTest, BadFlagsRejected)
{
    EXPECT_NE(run_cli("scan --format xml " + fixture("clean.apk")).exit_code, 0);
    EXPECT_NE(run_cli("scan --jobs 0 " + fixture("clean.apk")).exit_code, 0);
    EXPECT_NE(run_cli("scan --min-string-len 0 " + fixture("clean.apk")).exit_code, 0);
}

TEST(CliExpand, DirectoriesRecurseSorted)
{
    const auto root = fs::temp_directory_path() / "wasmdroid_expand";
    fs::remove_all(root);
    fs::create_directories(root / "b" / "c");
    for (const auto* f : {"z.apk", "b/a.WASM", "b/c/x.apk", "b/notes.txt"})
        std::ofstream(root / f) << "x";
    const auto files = expand_inputs({root});
    ASSERT_EQ(files.size(), 3u);
    EXPECT_TRUE(std::is_sorted(files.begin(), files.end()));
    fs::remove_all(root);
}
