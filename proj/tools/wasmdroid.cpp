// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/cli.hpp>
#include <wasmdroid/docs.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/scan.hpp>
#include <CLI11.hpp>
#include <fstream>
#include <iostream>

namespace
{
int dump(const std::string& file, std::optional<uint64_t> offset)
{
    using namespace wasmdroid;
    const auto bytes = read_file(file);
    ByteView view = bytes;
    auto mode = ParseMode::Strict;
    if (offset)
    {
        if (*offset > bytes.size())
            throw Error{ErrorCode::IoError, "offset past end of file"};
        view = view.subspan(static_cast<size_t>(*offset));
        mode = ParseMode::Prefix;
    }
    std::cout << dump_structure(parse_module(view, mode));
    return 0;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"wasmdroid: find WebAssembly payloads hidden in Android packages"};
    app.require_subcommand(1);

    wasmdroid::CliConfig config;
    std::string format = "json";
    auto* scan = app.add_subcommand("scan", "scan APKs, .wasm files or directories");
    scan->add_option("paths", config.inputs, "inputs")->required();
    scan->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));
    scan->add_flag("--deep", config.deep, "also extract strings from the whole module binary");
    scan->add_option("--min-string-len", config.min_string_len, "minimum printable run length")
        ->check(CLI::PositiveNumber);
    scan->add_option("--extract-out", config.extract_out, "write carved modules to this directory");
    scan->add_option("--catalog", config.catalog, "indicator catalog file");
    scan->add_option("--weights", config.weights, "scoring table file");
    scan->add_option("--jobs", config.jobs, "worker threads")->check(CLI::PositiveNumber);

    std::string dump_file;
    std::optional<uint64_t> dump_offset;
    auto* dump_cmd = app.add_subcommand("dump", "print the structure of a Wasm module");
    dump_cmd->add_option("file", dump_file, "module file")->required();
    dump_cmd->add_option("--offset", dump_offset, "parse a module embedded at this byte offset");

    std::optional<std::filesystem::path> docs_out;
    std::optional<std::filesystem::path> docs_catalog, docs_weights;
    auto* docs = app.add_subcommand("docs", "print the catalog reference in markdown");
    docs->add_option("-o,--output", docs_out, "write to a file instead of stdout");
    docs->add_option("--catalog", docs_catalog, "indicator catalog file");
    docs->add_option("--weights", docs_weights, "scoring table file");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*scan)
        {
            config.format = format == "text" ? wasmdroid::OutputFormat::Text : wasmdroid::OutputFormat::Json;
            return wasmdroid::run(config, std::cout, std::cerr);
        }
        if (*dump_cmd)
            return dump(dump_file, dump_offset);
        const auto cats = wasmdroid::Catalogs::load(std::nullopt, docs_catalog, docs_weights);
        const auto md = wasmdroid::generate_catalog_reference(cats);
        if (docs_out)
        {
            std::ofstream out{*docs_out, std::ios::binary};
            out << md;
            return out ? 0 : 1;
        }
        std::cout << md;
        return 0;
    }
    catch (const std::exception& e)
    {
        std::cerr << "wasmdroid: " << e.what() << "\n";
        return wasmdroid::kExitOperationalError;
    }
}
