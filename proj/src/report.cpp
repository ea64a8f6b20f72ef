// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "tsv.hpp"
#include <wasmdroid/data.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/report.hpp>
#include <algorithm>
#include <charconv>
#include <nlohmann/json.hpp>
#include <sstream>
#include <tuple>

namespace wasmdroid
{
using nlohmann::json;

std::string_view to_string(Verdict v) noexcept
{
    switch (v)
    {
    case Verdict::Clean:
        return "Clean";
    case Verdict::WasmPresent:
        return "WasmPresent";
    case Verdict::SuspiciousHiding:
        return "SuspiciousHiding";
    case Verdict::LikelyMaliciousHiding:
        return "LikelyMaliciousHiding";
    }
    return "?";
}

std::optional<Verdict> verdict_from_string(std::string_view s) noexcept
{
    for (const auto v : {Verdict::Clean, Verdict::WasmPresent, Verdict::SuspiciousHiding,
             Verdict::LikelyMaliciousHiding})
    {
        if (to_string(v) == s)
            return v;
    }
    return std::nullopt;
}

std::string evidence_kinds::capability(const Capability& c)
{
    return "capability:" + c.name;
}

std::string evidence_kinds::ioc(IocKind k)
{
    return "ioc:" + std::string{to_string(k)};
}

namespace
{
uint64_t parse_number(std::string_view s, const std::string& where)
{
    uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || s.empty())
        throw Error{ErrorCode::CatalogError, where + ": '" + std::string{s} + "' is not a non-negative integer"};
    return v;
}

std::set<std::string> split_kinds(std::string_view s)
{
    std::set<std::string> out;
    while (!s.empty())
    {
        const auto comma = s.find(',');
        const auto item = s.substr(0, comma);
        if (!item.empty())
            out.emplace(item);
        if (comma == std::string_view::npos)
            break;
        s.remove_prefix(comma + 1);
    }
    return out;
}
}  // namespace

ScoringTable ScoringTable::parse(std::string_view text)
{
    ScoringTable t;
    std::optional<uint64_t> present, suspicious, malicious;
    for (const auto& row : detail::read_tsv(text))
    {
        const auto where = "weights line " + std::to_string(row.number);
        const auto& f = row.fields;
        if (f[0] == "weight" && f.size() == 3 && !f[1].empty())
        {
            if (!t.m_weights.emplace(std::string{f[1]}, parse_number(f[2], where)).second)
                throw Error{ErrorCode::CatalogError, where + ": duplicate weight for '" + std::string{f[1]} + "'"};
        }
        else if (f[0] == "cap" && f.size() == 4 && !f[1].empty())
            t.m_caps.push_back({std::string{f[1]}, split_kinds(f[3]), parse_number(f[2], where)});
        else if (f[0] == "threshold" && f.size() == 3)
        {
            const auto n = parse_number(f[2], where);
            if (f[1] == "WasmPresent")
                present = n;
            else if (f[1] == "SuspiciousHiding")
                suspicious = n;
            else if (f[1] == "LikelyMaliciousHiding")
                malicious = n;
            else
                throw Error{ErrorCode::CatalogError, where + ": unknown threshold '" + std::string{f[1]} + "'"};
        }
        else if (f[0] == "trigger" && f.size() == 4 && !f[1].empty() && !f[2].empty())
            t.m_triggers.push_back({std::string{f[1]}, std::string{f[2]}, split_kinds(f[3])});
        else
            throw Error{ErrorCode::CatalogError, where + ": unrecognised row"};
    }
    if (!present || !suspicious || !malicious)
        throw Error{ErrorCode::CatalogError, "weights: all three thresholds are required"};
    if (!(*present < *suspicious && *suspicious < *malicious))
        throw Error{ErrorCode::CatalogError, "weights: thresholds must be strictly increasing"};
    t.m_wasm_present = *present;
    t.m_suspicious = *suspicious;
    t.m_malicious = *malicious;
    t.m_digest = sha256_hex(text);
    return t;
}

const ScoringTable& ScoringTable::builtin()
{
    static const ScoringTable t = parse(builtin_data::weights_tsv());
    return t;
}

uint64_t ScoringTable::weight(std::string_view kind) const
{
    const auto it = m_weights.find(kind);
    return it == m_weights.end() ? 0 : it->second;
}

Verdict ScoringTable::verdict_for(uint64_t score, bool hard_trigger) const noexcept
{
    if (hard_trigger || score >= m_malicious)
        return Verdict::LikelyMaliciousHiding;
    if (score >= m_suspicious)
        return Verdict::SuspiciousHiding;
    if (score >= m_wasm_present)
        return Verdict::WasmPresent;
    return Verdict::Clean;
}

uint64_t compute_score(const std::vector<EvidenceRow>& evidence, const ScoringTable& table)
{
    std::vector<uint64_t> group_sums(table.caps().size(), 0);
    uint64_t score = 0;
    for (const auto& row : evidence)
    {
        const auto w = table.weight(row.kind);
        bool grouped = false;
        for (size_t g = 0; g < table.caps().size() && !grouped; ++g)
        {
            if (table.caps()[g].kinds.count(row.kind))
            {
                group_sums[g] += w;
                grouped = true;
            }
        }
        if (!grouped)
            score += w;
    }
    for (size_t g = 0; g < group_sums.size(); ++g)
        score += std::min(group_sums[g], table.caps()[g].cap);
    return score;
}

std::vector<std::string> fired_triggers(const std::vector<EvidenceRow>& evidence, const ScoringTable& table)
{
    std::map<uint32_t, std::set<std::string>> per_module;
    for (const auto& row : evidence)
    {
        if (row.module)
            per_module[*row.module].insert(row.kind);
    }
    std::vector<std::string> out;
    for (const auto& t : table.triggers())
    {
        const bool fired = std::any_of(per_module.begin(), per_module.end(), [&](const auto& entry) {
            const auto& kinds = entry.second;
            return kinds.count(t.required) &&
                   std::any_of(t.any_of.begin(), t.any_of.end(), [&](const auto& k) { return kinds.count(k) > 0; });
        });
        if (fired)
            out.push_back(t.name);
    }
    return out;
}

std::string extract_file_name(std::string_view source_path, uint64_t offset)
{
    std::string out;
    for (const char c : source_path)
    {
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                          c == '-' || c == '_';
        out.push_back(keep ? c : '_');
    }
    return out + "@" + std::to_string(offset) + ".wasm";
}

ScanReport assemble(const ReportInputs& in, const ScoringTable& table)
{
    const auto& caps = in.capabilities ? *in.capabilities : CapabilityTable::builtin();
    const auto& catalog = in.catalog ? *in.catalog : IndicatorCatalog::builtin();
    ScanReport r;
    r.target_path = in.target_path;
    r.target_kind = in.target_kind;
    r.target_sha256 = in.target_sha256;
    r.catalog_digests = in.catalog_digests;
    r.warnings = in.warnings;

    if (in.inventory)
    {
        for (const auto c : {FileClass::Manifest, FileClass::Dex, FileClass::NativeLib, FileClass::Asset,
                 FileClass::HtmlJs, FileClass::WasmFile, FileClass::Resource, FileClass::Other,
                 FileClass::UnsupportedCompression})
            r.inventory_summary[std::string{to_string(c)}] = 0;
        for (const auto c : in.inventory->classes())
            ++r.inventory_summary[std::string{to_string(c)}];
        r.inventory_summary["entries"] = in.inventory->entries().size();
        r.duplicates = in.inventory->duplicates();
    }

    auto row = [&](std::string_view kind, std::string path, uint32_t occ, uint64_t offset,
                   std::optional<uint32_t> module, std::string detail) {
        r.evidence.push_back(
            {std::string{kind}, table.weight(kind), std::move(path), occ, offset, module, std::move(detail)});
    };

    const auto* candidates = in.candidates;
    for (size_t i = 0; candidates && i < candidates->size(); ++i)
    {
        const auto& c = (*candidates)[i];
        const auto idx = static_cast<uint32_t>(i);
        ModuleRecord m;
        m.source = c.source_path;
        m.occurrence = c.source_occurrence;
        m.source_class = std::string{to_string(c.source_class)};
        m.offset = c.offset;
        m.length = c.length;
        m.status = std::string{to_string(c.status)};
        m.failure = c.failure;

        const bool wasm_asset = c.source_class == FileClass::WasmFile && c.offset == 0;
        if (wasm_asset)
            row(evidence_kinds::WasmAsset, c.source_path, c.source_occurrence, c.offset, idx, "module shipped as a .wasm file");
        if (c.status == CarveStatus::MagicOnly)
        {
            row(evidence_kinds::MagicOnly, c.source_path, c.source_occurrence, c.offset, idx, c.failure);
            r.wasm_modules.push_back(std::move(m));
            continue;
        }

        const auto& mod = *c.module;
        m.sha256 = sha256_hex(c.bytes);
        const auto occ_path =
            c.source_occurrence ? c.source_path + "~" + std::to_string(c.source_occurrence) : c.source_path;
        m.extract_name = extract_file_name(occ_path, c.offset);
        m.structure_sha256 = sha256_hex(dump_structure(mod));
        for (const auto& imp : mod.imports)
        {
            ImportRecord rec{imp.module, imp.name, std::string{to_string(imp.kind)}, {}};
            if (imp.kind == ExternKind::Func)
                rec.capability = caps.classify(imp.module, imp.name).name;
            m.imports.push_back(std::move(rec));
        }
        for (const auto& e : mod.exports)
            m.exports.push_back({e.name, std::string{to_string(e.kind)}, e.index});
        for (const auto& s : mod.sections)
        {
            if (s.malformed)
                m.malformed_sections.push_back(std::string{section_name(s.id)} + ": " + s.error);
        }

        row(evidence_kinds::ParsedModule, c.source_path, c.source_occurrence, c.offset, idx,
            std::to_string(mod.imports.size()) + " imports, " + std::to_string(mod.exports.size()) + " exports");
        if (!wasm_asset)
            row(evidence_kinds::CarvedHidden, c.source_path, c.source_occurrence, c.offset, idx,
                "module embedded in " + m.source_class + " entry");

        std::set<Capability> categories;
        if (i < in.findings.size())
        {
            const auto& f = in.findings[i];
            for (const auto& p : f.profiles)
            {
                ProfileRecord pr;
                pr.export_name = p.export_name;
                pr.function_index = p.function_index;
                for (const auto& [module, name] : p.reachable_imports)
                    pr.reachable_imports.push_back({module, name, "func", caps.classify(module, name).name});
                for (const auto& cat : p.categories)
                {
                    pr.categories.push_back(cat.name);
                    categories.insert(cat);
                }
                pr.soundness = std::string{to_string(p.soundness)};
                m.capabilities.push_back(std::move(pr));
            }
            std::set<std::pair<std::string, std::string>> seen;
            for (const auto& h : f.iocs)
            {
                m.iocs.push_back({std::string{to_string(h.kind)}, h.value, std::string{to_string(h.source.origin)},
                    h.source.segment, h.source.offset, h.source.memory_addr, h.source.section});
                const auto kind = evidence_kinds::ioc(h.kind);
                if (seen.emplace(kind, h.value).second)
                    row(kind, c.source_path, c.source_occurrence, c.offset, idx, h.value);
            }
        }
        for (const auto& cat : categories)
        {
            if (cat != capabilities::None)
                row(evidence_kinds::capability(cat), c.source_path, c.source_occurrence, c.offset, idx,
                    "reachable from an export");
        }
        r.wasm_modules.push_back(std::move(m));
    }

    {
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& h : in.host_iocs)
        {
            r.host_iocs.push_back({h.path, h.occurrence, std::string{to_string(h.hit.kind)}, h.hit.value,
                h.hit.source.offset});
        }
        std::sort(r.host_iocs.begin(), r.host_iocs.end(), [](const auto& a, const auto& b) {
            return std::tie(a.path, a.occurrence, a.offset, a.kind, a.value) <
                   std::tie(b.path, b.occurrence, b.offset, b.kind, b.value);
        });
        r.host_iocs.erase(std::unique(r.host_iocs.begin(), r.host_iocs.end()), r.host_iocs.end());
        for (const auto& h : r.host_iocs)
        {
            const auto kind = "ioc:" + h.kind;
            if (seen.emplace(kind, h.value).second)
                row(kind, h.path, h.occurrence, h.offset, std::nullopt, h.value);
        }
    }

    std::set<std::string> scored_ids;
    for (const auto& ind : in.indicators)
    {
        r.indicators.push_back({ind.id, std::string{to_string(ind.severity)}, std::string{to_string(ind.channel)},
            ind.path, ind.occurrence, std::string{to_string(ind.locus)}, ind.position, ind.evidence});
        const auto* entry = catalog.find(ind.id);
        if (!entry || entry->evidence_kind().empty() || !scored_ids.insert(ind.id).second)
            continue;
        row(entry->evidence_kind(), ind.path, ind.occurrence, ind.position, std::nullopt, "indicator " + ind.id);
    }

    r.score = compute_score(r.evidence, table);
    r.triggers = fired_triggers(r.evidence, table);
    r.verdict = std::string{to_string(table.verdict_for(r.score, !r.triggers.empty()))};
    return r;
}

namespace
{
json opt(const std::optional<uint64_t>& v)
{
    return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<T>();
}

json to_json(const ImportRecord& i)
{
    return {{"module", i.module}, {"name", i.name}, {"kind", i.kind}, {"capability", i.capability}};
}

ImportRecord import_from(const json& j)
{
    return {j.at("module"), j.at("name"), j.at("kind"), j.at("capability")};
}

json to_json(const ModuleRecord& m)
{
    json imports = json::array(), exports = json::array(), profiles = json::array(), iocs = json::array();
    for (const auto& i : m.imports)
        imports.push_back(to_json(i));
    for (const auto& e : m.exports)
        exports.push_back({{"name", e.name}, {"kind", e.kind}, {"index", e.index}});
    for (const auto& p : m.capabilities)
    {
        json reach = json::array();
        for (const auto& i : p.reachable_imports)
            reach.push_back(to_json(i));
        profiles.push_back({{"export", p.export_name}, {"function_index", p.function_index},
            {"reachable_imports", reach}, {"categories", p.categories}, {"soundness", p.soundness}});
    }
    for (const auto& i : m.iocs)
        iocs.push_back({{"kind", i.kind}, {"value", i.value}, {"origin", i.origin}, {"segment", i.segment},
            {"offset", i.offset}, {"memory_addr", opt(i.memory_addr)}, {"section", i.section}});
    return {{"source", m.source}, {"occurrence", m.occurrence}, {"source_class", m.source_class},
        {"offset", m.offset}, {"length", m.length}, {"status", m.status}, {"sha256", m.sha256},
        {"extract_name", m.extract_name}, {"structure_sha256", m.structure_sha256}, {"failure", m.failure},
        {"imports", imports}, {"exports", exports}, {"capabilities", profiles}, {"iocs", iocs},
        {"malformed_sections", m.malformed_sections}};
}

ModuleRecord module_from(const json& j)
{
    ModuleRecord m;
    m.source = j.at("source");
    m.occurrence = j.at("occurrence");
    m.source_class = j.at("source_class");
    m.offset = j.at("offset");
    m.length = j.at("length");
    m.status = j.at("status");
    m.sha256 = j.at("sha256");
    m.extract_name = j.at("extract_name");
    m.structure_sha256 = j.at("structure_sha256");
    m.failure = j.at("failure");
    for (const auto& i : j.at("imports"))
        m.imports.push_back(import_from(i));
    for (const auto& e : j.at("exports"))
        m.exports.push_back({e.at("name"), e.at("kind"), e.at("index")});
    for (const auto& p : j.at("capabilities"))
    {
        ProfileRecord pr;
        pr.export_name = p.at("export");
        pr.function_index = p.at("function_index");
        for (const auto& i : p.at("reachable_imports"))
            pr.reachable_imports.push_back(import_from(i));
        pr.categories = p.at("categories").get<std::vector<std::string>>();
        pr.soundness = p.at("soundness");
        m.capabilities.push_back(std::move(pr));
    }
    for (const auto& i : j.at("iocs"))
        m.iocs.push_back({i.at("kind"), i.at("value"), i.at("origin"), i.at("segment"), i.at("offset"),
            get_opt<uint64_t>(i, "memory_addr"), i.at("section")});
    m.malformed_sections = j.at("malformed_sections").get<std::vector<std::string>>();
    return m;
}
}  // namespace

std::string render_json(const ScanReport& r)
{
    json modules = json::array(), host = json::array(), indicators = json::array(), evidence = json::array();
    for (const auto& m : r.wasm_modules)
        modules.push_back(to_json(m));
    for (const auto& h : r.host_iocs)
        host.push_back({{"path", h.path}, {"occurrence", h.occurrence}, {"kind", h.kind}, {"value", h.value},
            {"offset", h.offset}});
    for (const auto& i : r.indicators)
        indicators.push_back({{"id", i.id}, {"severity", i.severity}, {"channel", i.channel}, {"path", i.path},
            {"occurrence", i.occurrence}, {"locus", i.locus}, {"position", i.position}, {"evidence", i.evidence}});
    for (const auto& e : r.evidence)
        evidence.push_back({{"kind", e.kind}, {"weight", e.weight}, {"path", e.path}, {"occurrence", e.occurrence},
            {"offset", e.offset}, {"module", e.module ? json(*e.module) : json(nullptr)}, {"detail", e.detail}});
    const json doc = {
        {"schema_version", r.schema_version},
        {"tool_version", r.tool_version},
        {"target", {{"path", r.target_path}, {"kind", r.target_kind}, {"sha256", r.target_sha256}}},
        {"catalog_digests", r.catalog_digests},
        {"inventory_summary", r.inventory_summary},
        {"duplicates", r.duplicates},
        {"wasm_modules", modules},
        {"host_iocs", host},
        {"indicators", indicators},
        {"evidence", evidence},
        {"triggers", r.triggers},
        {"score", r.score},
        {"verdict", r.verdict},
        {"warnings", r.warnings},
    };
    // Invalid UTF-8 from hostile inputs is replaced rather than thrown.
    return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

ScanReport parse_report_json(std::string_view text)
{
    try
    {
        const auto j = json::parse(text);
        ScanReport r;
        r.schema_version = j.at("schema_version");
        r.tool_version = j.at("tool_version");
        r.target_path = j.at("target").at("path");
        r.target_kind = j.at("target").at("kind");
        r.target_sha256 = j.at("target").at("sha256");
        r.catalog_digests = j.at("catalog_digests").get<std::map<std::string, std::string>>();
        r.inventory_summary = j.at("inventory_summary").get<std::map<std::string, uint64_t>>();
        r.duplicates = j.at("duplicates").get<std::vector<std::string>>();
        for (const auto& m : j.at("wasm_modules"))
            r.wasm_modules.push_back(module_from(m));
        for (const auto& h : j.at("host_iocs"))
            r.host_iocs.push_back({h.at("path"), h.at("occurrence"), h.at("kind"), h.at("value"), h.at("offset")});
        for (const auto& i : j.at("indicators"))
            r.indicators.push_back({i.at("id"), i.at("severity"), i.at("channel"), i.at("path"), i.at("occurrence"),
                i.at("locus"), i.at("position"), i.at("evidence")});
        for (const auto& e : j.at("evidence"))
            r.evidence.push_back({e.at("kind"), e.at("weight"), e.at("path"), e.at("occurrence"), e.at("offset"),
                get_opt<uint32_t>(e, "module"), e.at("detail")});
        r.triggers = j.at("triggers").get<std::vector<std::string>>();
        r.score = j.at("score");
        r.verdict = j.at("verdict");
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    }
    catch (const json::exception& e)
    {
        throw Error{ErrorCode::IoError, std::string{"report JSON: "} + e.what()};
    }
}

std::string render_text(const ScanReport& r)
{
    std::ostringstream out;
    out << "target   " << r.target_path << " (" << r.target_kind << ")\n"
        << "sha256   " << r.target_sha256 << "\n"
        << "verdict  " << r.verdict << "\n"
        << "score    " << r.score << "\n"
        << "modules  " << r.wasm_modules.size() << "  indicators " << r.indicators.size() << "  host iocs "
        << r.host_iocs.size() << "\n";
    if (!r.triggers.empty())
    {
        out << "triggers";
        for (const auto& t : r.triggers)
            out << " " << t;
        out << "\n";
    }

    for (size_t i = 0; i < r.wasm_modules.size(); ++i)
    {
        const auto& m = r.wasm_modules[i];
        out << "\n[module " << i << "] " << m.source << " @" << m.offset << " " << m.status;
        if (m.status == "Parsed")
            out << " len=" << m.length << " sha256=" << m.sha256;
        else
            out << " (" << m.failure << ")";
        out << "\n";
        for (const auto& imp : m.imports)
            out << "  import  " << imp.kind << " " << imp.module << "." << imp.name
                << (imp.capability.empty() ? "" : "  [" + imp.capability + "]") << "\n";
        for (const auto& e : m.exports)
            out << "  export  " << e.kind << " " << e.name << " (idx " << e.index << ")\n";
        for (const auto& p : m.capabilities)
        {
            out << "  reach   " << p.export_name << " ->";
            for (const auto& c : p.categories)
                out << " " << c;
            out << " (" << p.soundness << ")\n";
        }
        for (const auto& ioc : m.iocs)
            out << "  ioc     " << ioc.kind << " " << ioc.value << "\n";
        for (const auto& s : m.malformed_sections)
            out << "  malformed " << s << "\n";
    }
    if (!r.host_iocs.empty())
    {
        out << "\n[host iocs]\n";
        for (const auto& h : r.host_iocs)
            out << "  " << h.kind << " " << h.value << "  " << h.path << " @" << h.offset << "\n";
    }
    if (!r.indicators.empty())
    {
        out << "\n[indicators]\n";
        for (const auto& i : r.indicators)
        {
            out << "  " << i.severity << "  " << i.id << "  " << i.path;
            if (i.locus != "path")
                out << " " << i.locus << "=" << i.position;
            out << "\n";
        }
    }
    if (!r.evidence.empty())
    {
        out << "\n[evidence]\n";
        for (const auto& e : r.evidence)
            out << "  +" << e.weight << "  " << e.kind << "  " << e.path << " @" << e.offset << "  " << e.detail
                << "\n";
    }
    if (!r.warnings.empty())
    {
        out << "\n[warnings]\n";
        for (const auto& w : r.warnings)
            out << "  " << w << "\n";
    }
    return out.str();
}
}  // namespace wasmdroid
