// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/carver.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/scan.hpp>
#include <wasmdroid/testkit/manifest.hpp>
#include <nlohmann/json.hpp>
#include <random>

namespace wasmdroid::testkit
{
using nlohmann::json;

namespace
{
[[noreturn]] void bad(const std::string& what)
{
    throw Error{ErrorCode::CatalogError, "fixture manifest: " + what};
}

Bytes hex_bytes(const std::string& hex)
{
    if (hex.size() % 2 != 0)
        bad("odd-length hex string");
    Bytes out;
    for (size_t i = 0; i < hex.size(); i += 2)
        out.push_back(static_cast<uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
    return out;
}

/// "text" or "hex" field as bytes.
Bytes literal(const json& j)
{
    if (j.contains("text"))
        return to_bytes(j.at("text").get<std::string>());
    if (j.contains("hex"))
        return hex_bytes(j.at("hex").get<std::string>());
    return {};
}

std::vector<ValType> valtypes(const json& j, const char* key)
{
    std::vector<ValType> out;
    if (!j.contains(key))
        return out;
    for (const auto& t : j.at(key))
    {
        const auto v = valtype_from_string(t.get<std::string>());
        if (!v)
            bad("unknown value type " + t.dump());
        out.push_back(*v);
    }
    return out;
}

FuncSig sig_of(const json& j)
{
    return {valtypes(j, "params"), valtypes(j, "results")};
}

Op op_of(const json& j)
{
    if (j.is_string())
    {
        const auto s = j.get<std::string>();
        if (s == "drop")
            return op::Drop{};
        if (s == "end")
            return op::End{};
        bad("unknown op '" + s + "'");
    }
    if (j.contains("call"))
        return op::Call{j.at("call").get<uint32_t>()};
    if (j.contains("call_indirect"))
        return op::CallIndirect{j.at("call_indirect").get<uint32_t>()};
    if (j.contains("i32_const"))
        return op::I32Const{j.at("i32_const").get<int32_t>()};
    if (j.contains("raw"))
        return op::RawByte{j.at("raw").get<uint8_t>()};
    bad("unknown op " + j.dump());
}

ModuleSpec module_of(const json& j)
{
    ModuleSpec m;
    for (const auto& i : j.value("imports", json::array()))
        m.imports.push_back({i.at("module"), i.at("name"), sig_of(i)});
    for (const auto& f : j.value("funcs", json::array()))
    {
        FuncSpec fs{sig_of(f), {}};
        for (const auto& o : f.value("body", json::array()))
            fs.body.push_back(op_of(o));
        m.funcs.push_back(std::move(fs));
    }
    for (const auto& e : j.value("exports", json::array()))
        m.exports.push_back({e.at("name"), e.at("func")});
    for (const auto& d : j.value("data", json::array()))
    {
        DataSpec ds;
        if (!d.value("passive", false))
            ds.offset = d.value("offset", 0u);
        ds.bytes = literal(d);
        m.data.push_back(std::move(ds));
    }
    for (const auto& c : j.value("customs", json::array()))
        m.customs.push_back({c.at("name"), literal(c)});
    m.table = j.value("table", std::vector<uint32_t>{});
    return m;
}

/// Deterministic filler that never contains the Wasm magic.
Bytes filler(size_t size, uint32_t seed)
{
    std::mt19937 rng{seed};
    std::uniform_int_distribution<int> dist{0, 255};
    Bytes out(size);
    for (auto& b : out)
        b = static_cast<uint8_t>(dist(rng));
    for (const auto off : scan_magic(out))
        out[off] = 0x01;
    return out;
}
}  // namespace

ModuleSpec module_spec_from_json(std::string_view text)
{
    try
    {
        return module_of(json::parse(text));
    }
    catch (const json::exception& e)
    {
        bad(e.what());
    }
}

Fixture build_fixture(std::string_view text)
{
    try
    {
        const auto j = json::parse(text);
        Fixture fx;
        fx.name = j.at("name");
        fx.kind = j.value("kind", "apk");
        const auto modules = j.value("modules", json::object());
        for (const auto& [name, spec] : modules.items())
            fx.modules[name] = module_of(spec);
        auto module_bytes = [&](const std::string& name) {
            const auto it = fx.modules.find(name);
            if (it == fx.modules.end())
                bad("unknown module '" + name + "'");
            return emit_module(it->second);
        };

        if (fx.kind == "wasm")
        {
            const std::string name = j.at("module");
            fx.bytes = module_bytes(name);
            fx.placements.push_back({"", 0, name});
            return fx;
        }
        if (fx.kind != "apk")
            bad("kind must be apk or wasm");

        std::vector<ZipEntrySpec> entries;
        for (const auto& e : j.at("entries"))
        {
            ZipEntrySpec z;
            z.path = e.at("path");
            if (e.contains("module"))
            {
                const std::string name = e.at("module");
                z.bytes = module_bytes(name);
                fx.placements.push_back({z.path, 0, name});
            }
            else if (e.contains("dex"))
            {
                const auto& d = e.at("dex");
                DexSpec ds{d.value("strings", std::vector<std::string>{}), {}};
                const auto payload_module = d.value("payload_module", std::string{});
                if (!payload_module.empty())
                    ds.payload = module_bytes(payload_module);
                auto emitted = emit_dex(ds);
                z.bytes = std::move(emitted.bytes);
                if (!payload_module.empty())
                    fx.placements.push_back({z.path, emitted.payload_offset, payload_module});
            }
            else if (e.contains("native"))
            {
                const auto& n = e.at("native");
                const auto strings = n.value("strings", std::vector<std::string>{});
                z.bytes = emit_native_blob(strings);
            }
            else if (e.contains("filler"))
                z.bytes = filler(e.at("filler").at("size"), e.at("filler").value("seed", 1u));
            else
                z.bytes = literal(e);

            for (const auto& p : e.value("plant", json::array()))
            {
                const std::string name = p.at("module");
                const uint64_t offset = p.at("offset");
                const auto mod = module_bytes(name);
                if (z.bytes.size() < offset + mod.size())
                    z.bytes.resize(offset + mod.size(), 0);
                std::copy(mod.begin(), mod.end(), z.bytes.begin() + static_cast<std::ptrdiff_t>(offset));
                fx.placements.push_back({z.path, offset, name});
            }

            const auto method = e.value("method", std::string{"deflate"});
            if (method == "deflate")
                z.method = kMethodDeflate;
            else if (method == "stored")
                z.method = kMethodStored;
            else
                z.method = static_cast<uint16_t>(std::stoul(method));
            entries.push_back(std::move(z));
        }
        fx.bytes = emit_zip(entries);
        return fx;
    }
    catch (const json::exception& e)
    {
        bad(e.what());
    }
}

Fixture load_fixture(const std::filesystem::path& manifest)
{
    const auto bytes = read_file(manifest);
    return build_fixture(as_chars(bytes));
}
}  // namespace wasmdroid::testkit
