// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/container.hpp>
#include <wasmdroid/dex.hpp>
#include <wasmdroid/error.hpp>
#include <wasmdroid/leb128.hpp>
#include <wasmdroid/testkit/emit.hpp>
#include <zlib.h>
#include <algorithm>

namespace wasmdroid::testkit
{
namespace
{
template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void put_name(Bytes& out, std::string_view s)
{
    encode_leb_u32(out, static_cast<uint32_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

void put_sig(Bytes& out, const FuncSig& sig)
{
    out.push_back(0x60);
    encode_leb_u32(out, static_cast<uint32_t>(sig.params.size()));
    for (const auto t : sig.params)
        out.push_back(static_cast<uint8_t>(t));
    encode_leb_u32(out, static_cast<uint32_t>(sig.results.size()));
    for (const auto t : sig.results)
        out.push_back(static_cast<uint8_t>(t));
}

void put_section(Bytes& out, uint8_t id, const Bytes& payload)
{
    out.push_back(id);
    encode_leb_u32(out, static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
}

bool has_trailing_end(const FuncSpec& f)
{
    return !f.body.empty() && std::holds_alternative<op::End>(f.body.back());
}

bool uses_call_indirect(const ModuleSpec& spec)
{
    for (const auto& f : spec.funcs)
    {
        for (const auto& o : f.body)
        {
            if (std::holds_alternative<op::CallIndirect>(o))
                return true;
        }
    }
    return false;
}

[[noreturn]] void out_of_range(const std::string& what)
{
    throw Error{ErrorCode::IndexOutOfRange, what};
}
}  // namespace

Bytes emit_module(const ModuleSpec& spec)
{
    std::vector<FuncSig> types;
    auto type_of = [&](const FuncSig& sig) {
        const auto it = std::find(types.begin(), types.end(), sig);
        if (it != types.end())
            return static_cast<uint32_t>(it - types.begin());
        types.push_back(sig);
        return static_cast<uint32_t>(types.size() - 1);
    };
    std::vector<uint32_t> import_types, func_types;
    for (const auto& i : spec.imports)
        import_types.push_back(type_of(i.sig));
    for (const auto& f : spec.funcs)
        func_types.push_back(type_of(f.sig));

    const auto func_count = spec.imports.size() + spec.funcs.size();
    const bool need_table = !spec.table.empty() || uses_call_indirect(spec);

    Bytes out{kWasmMagic.begin(), kWasmMagic.end()};
    out.insert(out.end(), kWasmVersion1.begin(), kWasmVersion1.end());

    if (!types.empty())
    {
        Bytes s;
        encode_leb_u32(s, static_cast<uint32_t>(types.size()));
        for (const auto& t : types)
            put_sig(s, t);
        put_section(out, 1, s);
    }
    if (!spec.imports.empty())
    {
        Bytes s;
        encode_leb_u32(s, static_cast<uint32_t>(spec.imports.size()));
        for (size_t i = 0; i < spec.imports.size(); ++i)
        {
            put_name(s, spec.imports[i].module);
            put_name(s, spec.imports[i].name);
            s.push_back(0x00);
            encode_leb_u32(s, import_types[i]);
        }
        put_section(out, 2, s);
    }
    if (!spec.funcs.empty())
    {
        Bytes s;
        encode_leb_u32(s, static_cast<uint32_t>(spec.funcs.size()));
        for (const auto t : func_types)
            encode_leb_u32(s, t);
        put_section(out, 3, s);
    }
    if (need_table)
    {
        const auto n = static_cast<uint32_t>(spec.table.size());
        Bytes s{0x01, static_cast<uint8_t>(ValType::FuncRef), 0x01};
        encode_leb_u32(s, n);
        encode_leb_u32(s, n);
        put_section(out, 4, s);
    }
    if (!spec.data.empty())
    {
        uint64_t top = 0;
        for (const auto& d : spec.data)
            top = std::max<uint64_t>(top, uint64_t{d.offset.value_or(0)} + d.bytes.size());
        Bytes s{0x01, 0x00};
        encode_leb_u32(s, static_cast<uint32_t>(std::min<uint64_t>(top / 65536 + 1, 65536)));
        put_section(out, 5, s);
    }
    if (!spec.exports.empty())
    {
        Bytes s;
        encode_leb_u32(s, static_cast<uint32_t>(spec.exports.size()));
        for (const auto& e : spec.exports)
        {
            if (e.func >= func_count)
                out_of_range("export '" + e.name + "' names function " + std::to_string(e.func));
            put_name(s, e.name);
            s.push_back(0x00);
            encode_leb_u32(s, e.func);
        }
        put_section(out, 7, s);
    }
    if (!spec.table.empty())
    {
        Bytes s{0x01, 0x00, 0x41, 0x00, 0x0B};
        encode_leb_u32(s, static_cast<uint32_t>(spec.table.size()));
        for (const auto f : spec.table)
        {
            if (f >= func_count)
                out_of_range("table entry names function " + std::to_string(f));
            encode_leb_u32(s, f);
        }
        put_section(out, 9, s);
    }
    if (!spec.funcs.empty())
    {
        Bytes s;
        encode_leb_u32(s, static_cast<uint32_t>(spec.funcs.size()));
        for (const auto& f : spec.funcs)
        {
            Bytes body{0x00};  // no local declarations
            for (const auto& o : f.body)
            {
                std::visit(overloaded{
                               [&](const op::Call& c) {
                                   if (c.func >= func_count)
                                       out_of_range("call to function " + std::to_string(c.func));
                                   body.push_back(0x10);
                                   encode_leb_u32(body, c.func);
                               },
                               [&](const op::CallIndirect& c) {
                                   if (c.type >= types.size())
                                       out_of_range("call_indirect type " + std::to_string(c.type));
                                   body.insert(body.end(), {0x41, 0x00, 0x11});
                                   encode_leb_u32(body, c.type);
                                   body.push_back(0x00);
                               },
                               [&](const op::I32Const& c) {
                                   body.push_back(0x41);
                                   encode_leb_s64(body, c.value);
                               },
                               [&](const op::Drop&) { body.push_back(0x1A); },
                               [&](const op::End&) { body.push_back(0x0B); },
                               [&](const op::RawByte& r) { body.push_back(r.byte); },
                           },
                    o);
            }
            if (!has_trailing_end(f))
                body.push_back(0x0B);
            encode_leb_u32(s, static_cast<uint32_t>(body.size()));
            s.insert(s.end(), body.begin(), body.end());
        }
        put_section(out, 10, s);
    }
    if (!spec.data.empty())
    {
        Bytes s;
        encode_leb_u32(s, static_cast<uint32_t>(spec.data.size()));
        for (const auto& d : spec.data)
        {
            if (d.offset)
            {
                s.insert(s.end(), {0x00, 0x41});
                encode_leb_s64(s, static_cast<int32_t>(*d.offset));
                s.push_back(0x0B);
            }
            else
                s.push_back(0x01);
            encode_leb_u32(s, static_cast<uint32_t>(d.bytes.size()));
            s.insert(s.end(), d.bytes.begin(), d.bytes.end());
        }
        put_section(out, 11, s);
    }
    for (const auto& c : spec.customs)
    {
        Bytes s;
        put_name(s, c.name);
        s.insert(s.end(), c.bytes.begin(), c.bytes.end());
        put_section(out, 0, s);
    }
    return out;
}

std::vector<uint32_t> expected_calls(const FuncSpec& f)
{
    std::vector<uint32_t> out;
    for (const auto& o : f.body)
    {
        if (std::holds_alternative<op::RawByte>(o))
            break;
        if (const auto* c = std::get_if<op::Call>(&o))
            out.push_back(c->func);
    }
    return out;
}

bool matches_spec(const ModuleSpec& spec, const WasmModule& m, std::string* why)
{
    auto fail = [&](std::string msg) {
        if (why)
            *why = std::move(msg);
        return false;
    };
    if (m.has_malformed_section())
        return fail("module has a malformed section");
    if (m.imports.size() != spec.imports.size())
        return fail("import count");
    for (size_t i = 0; i < spec.imports.size(); ++i)
    {
        const auto& a = m.imports[i];
        const auto& b = spec.imports[i];
        if (a.module != b.module || a.name != b.name || a.kind != ExternKind::Func || a.sig != b.sig)
            return fail("import " + std::to_string(i));
    }
    if (m.functions.size() != spec.funcs.size() || m.code.size() != spec.funcs.size())
        return fail("function count");
    for (size_t i = 0; i < spec.funcs.size(); ++i)
    {
        const auto& f = spec.funcs[i];
        if (m.functions[i] >= m.types.size() || m.types[m.functions[i]] != f.sig)
            return fail("signature of function " + std::to_string(i));
        const auto& body = m.code[i];
        const bool raw = std::any_of(f.body.begin(), f.body.end(),
            [](const Op& o) { return std::holds_alternative<op::RawByte>(o); });
        const auto calls = expected_calls(f);
        if (raw)
        {
            if (body.calls.size() < calls.size() || !std::equal(calls.begin(), calls.end(), body.calls.begin()))
                return fail("calls of function " + std::to_string(i));
            continue;
        }
        const bool indirect = std::any_of(f.body.begin(), f.body.end(),
            [](const Op& o) { return std::holds_alternative<op::CallIndirect>(o); });
        if (body.calls != calls || body.has_call_indirect != indirect || body.opaque)
            return fail("body of function " + std::to_string(i));
    }
    if (m.exports.size() != spec.exports.size())
        return fail("export count");
    for (size_t i = 0; i < spec.exports.size(); ++i)
    {
        const auto& e = m.exports[i];
        if (e.name != spec.exports[i].name || e.kind != ExternKind::Func || e.index != spec.exports[i].func)
            return fail("export " + std::to_string(i));
    }
    if (m.data.size() != spec.data.size())
        return fail("data count");
    for (size_t i = 0; i < spec.data.size(); ++i)
    {
        const auto& d = m.data[i];
        const auto& s = spec.data[i];
        if (d.bytes != s.bytes || d.passive != !s.offset || (s.offset && d.resolved_offset != s.offset))
            return fail("data segment " + std::to_string(i));
    }
    if (m.customs.size() != spec.customs.size())
        return fail("custom section count");
    for (size_t i = 0; i < spec.customs.size(); ++i)
    {
        if (m.customs[i].name != spec.customs[i].name || m.customs[i].bytes != spec.customs[i].bytes)
            return fail("custom section " + std::to_string(i));
    }
    if (spec.table.empty() ? !m.elements.empty() : (m.elements.size() != 1 || m.elements[0].functions != spec.table))
        return fail("table contents");
    return true;
}

EmittedDex emit_dex(const DexSpec& spec)
{
    const auto n = static_cast<uint32_t>(spec.strings.size());
    const uint32_t ids_off = n ? static_cast<uint32_t>(kDexHeaderSize) : 0;
    const uint32_t data_off = static_cast<uint32_t>(kDexHeaderSize) + 4 * n;

    Bytes data;
    std::vector<uint32_t> offsets;
    for (const auto& s : spec.strings)
    {
        offsets.push_back(data_off + static_cast<uint32_t>(data.size()));
        const auto [mutf8, units] = encode_mutf8(s);
        encode_leb_u32(data, units);
        data.insert(data.end(), mutf8.begin(), mutf8.end());
        data.push_back(0x00);
    }
    const auto payload_offset = data_off + static_cast<uint32_t>(data.size());
    data.insert(data.end(), spec.payload.begin(), spec.payload.end());
    while (data.size() % 4 != 0)
        data.push_back(0x00);

    Bytes out{'d', 'e', 'x', '\n', '0', '3', '5', '\0'};
    out.resize(kDexHeaderSize, 0);
    auto put = [&](size_t pos, uint32_t v) {
        for (int i = 0; i < 4; ++i)
            out[pos + i] = static_cast<uint8_t>(v >> (8 * i));
    };
    const auto file_size = data_off + static_cast<uint32_t>(data.size());
    put(0x20, file_size);
    put(0x24, static_cast<uint32_t>(kDexHeaderSize));
    put(0x28, 0x12345678);
    put(0x38, n);
    put(0x3C, ids_off);
    put(0x68, static_cast<uint32_t>(data.size()));
    put(0x6C, data_off);
    for (const auto o : offsets)
        write_u32le(out, o);
    out.insert(out.end(), data.begin(), data.end());
    // signature (0x0C..0x20) left zero; checksum covers everything after it
    const auto sum = adler32(adler32(0L, Z_NULL, 0), out.data() + 12, static_cast<uInt>(out.size() - 12));
    put(0x08, static_cast<uint32_t>(sum));
    return {std::move(out), payload_offset};
}

Bytes emit_dex_with_strings(const std::vector<std::string>& strings)
{
    return emit_dex({strings, {}}).bytes;
}

Bytes deflate_raw(ByteView data)
{
    z_stream zs{};
    if (deflateInit2(&zs, 9, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error{ErrorCode::IoError, "deflateInit2 failed"};
    Bytes out(deflateBound(&zs, static_cast<uLong>(data.size())) + 16);
    zs.next_in = const_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    out.resize(zs.total_out);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw Error{ErrorCode::IoError, "deflate did not finish"};
    return out;
}

Bytes emit_zip(const std::vector<ZipEntrySpec>& entries)
{
    Bytes out, central;
    constexpr uint16_t kUtf8Flag = 0x0800;
    for (const auto& e : entries)
    {
        const auto crc = e.crc_override.value_or(
            static_cast<uint32_t>(crc32(crc32(0L, Z_NULL, 0), e.bytes.data(), static_cast<uInt>(e.bytes.size()))));
        const Bytes stored = e.method == kMethodDeflate ? deflate_raw(e.bytes) : e.bytes;
        const auto local_offset = static_cast<uint32_t>(out.size());
        const auto name_len = static_cast<uint16_t>(e.path.size());

        write_u32le(out, 0x04034b50);
        write_u16le(out, 20);
        write_u16le(out, kUtf8Flag);
        write_u16le(out, e.method);
        write_u16le(out, 0);
        write_u16le(out, 0x21);  // 1980-01-01
        write_u32le(out, crc);
        write_u32le(out, static_cast<uint32_t>(stored.size()));
        write_u32le(out, static_cast<uint32_t>(e.bytes.size()));
        write_u16le(out, name_len);
        write_u16le(out, 0);
        out.insert(out.end(), e.path.begin(), e.path.end());
        out.insert(out.end(), stored.begin(), stored.end());

        write_u32le(central, 0x02014b50);
        write_u16le(central, 20);
        write_u16le(central, 20);
        write_u16le(central, kUtf8Flag);
        write_u16le(central, e.method);
        write_u16le(central, 0);
        write_u16le(central, 0x21);
        write_u32le(central, crc);
        write_u32le(central, static_cast<uint32_t>(stored.size()));
        write_u32le(central, static_cast<uint32_t>(e.bytes.size()));
        write_u16le(central, name_len);
        write_u16le(central, 0);
        write_u16le(central, 0);
        write_u16le(central, 0);
        write_u16le(central, 0);
        write_u32le(central, 0);
        write_u32le(central, local_offset);
        central.insert(central.end(), e.path.begin(), e.path.end());
    }
    const auto cd_offset = static_cast<uint32_t>(out.size());
    out.insert(out.end(), central.begin(), central.end());
    write_u32le(out, 0x06054b50);
    write_u16le(out, 0);
    write_u16le(out, 0);
    write_u16le(out, static_cast<uint16_t>(entries.size()));
    write_u16le(out, static_cast<uint16_t>(entries.size()));
    write_u32le(out, static_cast<uint32_t>(central.size()));
    write_u32le(out, cd_offset);
    write_u16le(out, 0);
    return out;
}

Bytes emit_native_blob(const std::vector<std::string>& strings, ByteView payload)
{
    // ELF64 little-endian identification, rest of the header zeroed
    Bytes out{0x7F, 'E', 'L', 'F', 0x02, 0x01, 0x01};
    out.resize(64, 0);
    out.push_back(0x00);
    for (const auto& s : strings)
    {
        out.insert(out.end(), s.begin(), s.end());
        out.push_back(0x00);
    }
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}
}  // namespace wasmdroid::testkit
