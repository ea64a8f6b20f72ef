// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/docs.hpp>
#include <wasmdroid/error.hpp>
#include <sstream>

namespace wasmdroid
{
namespace
{
/// Inline code cell safe inside a markdown table.
std::string code(std::string_view s)
{
    std::string out = "`";
    for (const char c : s)
    {
        if (c == '|')
            out += "\\|";
        else
            out += c;
    }
    return out + "`";
}

std::string join(const std::set<std::string>& items)
{
    std::string out;
    for (const auto& i : items)
        out += (out.empty() ? "" : ", ") + code(i);
    return out;
}
}  // namespace

std::string generate_catalog_reference(const Catalogs& cats)
{
    std::ostringstream md;
    md << "# Catalog reference\n\n"
       << "Generated by `wasmdroid docs` from the tables in `data/`. Do not edit by hand;\n"
       << "`ctest` fails when this file and the shipped tables disagree.\n\n";

    md << "## Indicators\n\n"
       << "Columns: catalog id, channel, severity, match kind, pattern, and the scoring row the indicator\n"
       << "feeds (blank when it only informs).\n";
    for (const auto point : {DetectionPoint::WasmFiles, DetectionPoint::ByteArrays, DetectionPoint::NativeRuntime,
             DetectionPoint::JavaApi, DetectionPoint::Structural})
    {
        std::ostringstream rows;
        size_t count = 0;
        for (const auto& e : cats.indicators.entries())
        {
            if (e.detection_point() != point)
                continue;
            ++count;
            rows << "| " << code(e.id) << " | " << to_string(e.channel) << " | " << to_string(e.severity) << " | "
                 << to_string(e.match) << " | " << code(e.pattern) << " | "
                 << (e.evidence_kind().empty() ? "" : code(e.evidence_kind())) << " |\n";
        }
        if (count == 0 && point != DetectionPoint::Structural)
            throw Error{ErrorCode::CatalogError,
                "no catalog entry covers detection point " + std::string{to_string(point)}};
        md << "\n### " << to_string(point) << "\n\n"
           << "| id | channel | severity | match | pattern | scores as |\n"
           << "|----|---------|----------|-------|---------|-----------|\n"
           << rows.str();
    }

    md << "\n## Capability rules\n\nFirst matching row wins; imports matching no row are `HostCustom`.\n\n"
       << "| namespace | name | category |\n|-----------|------|----------|\n";
    for (const auto& r : cats.capabilities.rules())
        md << "| " << code(r.ns_glob) << " | " << code(r.name_glob) << " | " << r.category.name << " |\n";

    md << "\n## IoC patterns\n\nApplied in this order; a match overlapping an earlier one is dropped.\n\n"
       << "| kind | regex |\n|------|-------|\n";
    for (const auto& [kind, source] : cats.ioc_patterns.sources())
        md << "| " << to_string(kind) << " | " << code(source) << " |\n";

    const auto& w = cats.weights;
    md << "\n## Scoring\n\n| evidence | weight |\n|----------|--------|\n";
    for (const auto& [kind, n] : w.weights())
        md << "| " << code(kind) << " | " << n << " |\n";
    if (!w.caps().empty())
    {
        md << "\nCaps:\n\n";
        for (const auto& c : w.caps())
            md << "- " << code(c.name) << ": at most " << c.cap << " from " << join(c.kinds) << "\n";
    }
    md << "\nThresholds:\n\n"
       << "- WasmPresent: score >= " << w.wasm_present_min() << "\n"
       << "- SuspiciousHiding: score >= " << w.suspicious_min() << "\n"
       << "- LikelyMaliciousHiding: score >= " << w.malicious_min() << "\n";
    if (!w.triggers().empty())
    {
        md << "\nHard triggers (force LikelyMaliciousHiding when one module carries both):\n\n";
        for (const auto& t : w.triggers())
            md << "- " << code(t.name) << ": " << code(t.required) << " and any of " << join(t.any_of) << "\n";
    }

    md << "\n## Digests\n\nSHA-256 of each table, as embedded in every report.\n\n"
       << "| table | sha256 |\n|-------|--------|\n";
    for (const auto& [name, digest] : cats.digests())
        md << "| " << name << " | `" << digest << "` |\n";
    return md.str();
}
}  // namespace wasmdroid
