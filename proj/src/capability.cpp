// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include "tsv.hpp"
#include <wasmdroid/capability.hpp>
#include <wasmdroid/data.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/glob.hpp>
#include <algorithm>
#include <deque>

namespace wasmdroid
{
CapabilityTable CapabilityTable::parse(std::string_view text)
{
    CapabilityTable t;
    for (const auto& row : detail::read_tsv(text))
    {
        if (row.fields.size() != 3 || row.fields[0].empty() || row.fields[1].empty() || row.fields[2].empty())
            throw Error{ErrorCode::CatalogError,
                "capability table line " + std::to_string(row.number) + ": expected namespace, name_glob, category"};
        t.m_rules.push_back({std::string{row.fields[0]}, std::string{row.fields[1]},
            Capability{std::string{row.fields[2]}}});
    }
    t.m_digest = sha256_hex(text);
    return t;
}

const CapabilityTable& CapabilityTable::builtin()
{
    static const CapabilityTable table = parse(builtin_data::capabilities_tsv());
    return table;
}

Capability CapabilityTable::classify(std::string_view module, std::string_view name) const
{
    for (const auto& r : m_rules)
    {
        if (glob_match(r.ns_glob, module) && glob_match(r.name_glob, name))
            return r.category;
    }
    return capabilities::HostCustom;
}

Capability classify_import(std::string_view module, std::string_view name)
{
    return CapabilityTable::builtin().classify(module, name);
}

CallGraph build_call_graph(const WasmModule& m)
{
    CallGraph g;
    g.imported_count = static_cast<uint32_t>(m.imported_function_count());
    g.node_count = static_cast<uint32_t>(m.function_count());
    g.edges.resize(g.node_count);
    for (uint32_t local = 0; local < m.functions.size(); ++local)
    {
        const uint32_t node = g.imported_count + local;
        if (local >= m.code.size())
        {
            g.opaque_nodes.insert(node);
            continue;
        }
        const auto& body = m.code[local];
        auto& out = g.edges[node];
        for (const auto target : body.calls)
        {
            if (target < g.node_count)
                out.push_back(target);
            else
                g.opaque_nodes.insert(node);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        if (body.has_call_indirect)
            g.indirect_nodes.insert(node);
        if (body.opaque)
            g.opaque_nodes.insert(node);
    }
    for (const auto& seg : m.elements)
    {
        for (const auto f : seg.functions)
        {
            if (f < g.node_count)
                g.table_funcs.insert(f);
        }
    }
    return g;
}

std::string_view to_string(Soundness s) noexcept
{
    return s == Soundness::Exact ? "Exact" : "OverApprox";
}

CapabilityProfile reachable_imports(const CallGraph& g, const WasmModule& m, size_t export_index,
    const CapabilityTable& table)
{
    if (export_index >= m.exports.size() || m.exports[export_index].kind != ExternKind::Func ||
        m.exports[export_index].index >= g.node_count)
        throw Error{ErrorCode::NotAFunctionExport, "export " + std::to_string(export_index) + " is not a function"};

    const auto& exp = m.exports[export_index];
    CapabilityProfile p;
    p.export_name = exp.name;
    p.function_index = exp.index;

    std::vector<bool> seen(g.node_count, false);
    std::deque<uint32_t> frontier{exp.index};
    seen[exp.index] = true;
    auto push = [&](uint32_t f) {
        if (!seen[f])
        {
            seen[f] = true;
            frontier.push_back(f);
        }
    };
    const auto imports = function_index_map(m);
    while (!frontier.empty())
    {
        const auto f = frontier.front();
        frontier.pop_front();
        if (g.is_imported(f))
        {
            const auto& imp = std::get<ImportedFunction>(imports[f]);
            p.reachable_imports.emplace(imp.module, imp.name);
            continue;
        }
        for (const auto t : g.edges[f])
            push(t);
        if (g.indirect_nodes.count(f))
        {
            p.soundness = Soundness::OverApprox;
            for (const auto t : g.table_funcs)
                push(t);
        }
        if (g.opaque_nodes.count(f))
        {
            p.soundness = Soundness::OverApprox;
            for (uint32_t i = 0; i < g.imported_count; ++i)
                push(i);
        }
    }

    for (const auto& [module, name] : p.reachable_imports)
        p.categories.insert(table.classify(module, name));
    if (p.categories.size() > 1)
        p.categories.erase(capabilities::None);
    if (p.categories.empty())
        p.categories.insert(capabilities::None);
    return p;
}

std::vector<CapabilityProfile> profile_exports(const WasmModule& m, const CapabilityTable& table)
{
    const auto g = build_call_graph(m);
    std::vector<CapabilityProfile> out;
    for (size_t i = 0; i < m.exports.size(); ++i)
    {
        if (m.exports[i].kind == ExternKind::Func && m.exports[i].index < g.node_count)
            out.push_back(reachable_imports(g, m, i, table));
    }
    return out;
}
}  // namespace wasmdroid
