// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/cli.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/scan.hpp>
#include <algorithm>
#include <fstream>
#include <ostream>

namespace wasmdroid
{
namespace fs = std::filesystem;

int exit_code_for(Verdict v) noexcept
{
    switch (v)
    {
    case Verdict::Clean:
        return 0;
    case Verdict::WasmPresent:
        return 2;
    case Verdict::SuspiciousHiding:
        return 3;
    case Verdict::LikelyMaliciousHiding:
        return 4;
    }
    return kExitOperationalError;
}

namespace
{
bool scannable(const fs::path& p)
{
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".apk" || ext == ".wasm";
}

void write_file(const fs::path& p, ByteView bytes)
{
    std::ofstream out{p, std::ios::binary | std::ios::trunc};
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error{ErrorCode::IoError, "cannot write " + p.string()};
}
}  // namespace

std::vector<fs::path> expand_inputs(const std::vector<fs::path>& inputs)
{
    std::vector<fs::path> out;
    for (const auto& in : inputs)
    {
        std::error_code ec;
        if (!fs::is_directory(in, ec))
        {
            out.push_back(in);
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::recursive_directory_iterator{in, fs::directory_options::skip_permission_denied, ec})
        {
            if (e.is_regular_file(ec) && scannable(e.path()))
                found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

std::string report_suffix(OutputFormat f)
{
    return f == OutputFormat::Json ? ".wasmdroid.json" : ".wasmdroid.txt";
}

int run(const CliConfig& config, std::ostream& out, std::ostream& err)
{
    std::optional<Catalogs> cats;
    try
    {
        cats.emplace(Catalogs::load(std::nullopt, config.catalog, config.weights));
    }
    catch (const Error& e)
    {
        err << "wasmdroid: " << e.what() << "\n";
        return kExitOperationalError;
    }

    const auto inputs = expand_inputs(config.inputs);
    if (inputs.empty())
    {
        err << "wasmdroid: no .apk or .wasm inputs found\n";
        return kExitOperationalError;
    }

    ScanOptions opts;
    opts.deep = config.deep;
    opts.min_string_len = std::max<size_t>(1, config.min_string_len);
    opts.jobs = std::max(1u, config.jobs);

    const bool single = inputs.size() == 1;
    size_t failures = 0;
    Verdict worst = Verdict::Clean;
    for (const auto& input : inputs)
    {
        try
        {
            auto result = scan_bytes(input.generic_string(), read_file(input), *cats, opts);
            const auto& report = result.report;
            const auto rendered = config.format == OutputFormat::Json ? render_json(report) : render_text(report);
            if (single)
                out << rendered;
            else
            {
                const fs::path dest = input.string() + report_suffix(config.format);
                write_file(dest, as_bytes(rendered));
                out << input.generic_string() << "\t" << report.verdict << "\t" << dest.generic_string() << "\n";
            }
            if (config.extract_out)
            {
                auto dir = *config.extract_out;
                if (!single)
                    dir /= input.filename();
                fs::create_directories(dir);
                for (size_t i = 0; i < result.candidates.size(); ++i)
                {
                    const auto& c = result.candidates[i];
                    if (c.status == CarveStatus::Parsed)
                        write_file(dir / report.wasm_modules[i].extract_name, c.bytes);
                }
            }
            worst = std::max(worst, verdict_from_string(report.verdict).value_or(Verdict::Clean));
        }
        catch (const std::exception& e)
        {
            ++failures;
            err << "wasmdroid: " << input.generic_string() << ": " << e.what() << "\n";
        }
    }
    if (failures == inputs.size())
        return kExitOperationalError;
    return exit_code_for(worst);
}
}  // namespace wasmdroid
