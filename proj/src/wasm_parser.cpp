// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/error.hpp>
#include <wasmdroid/leb128.hpp>
#include <wasmdroid/wasm.hpp>
#include <algorithm>
#include <set>
#include <tuple>

namespace wasmdroid
{
namespace
{
/// Raised inside a section when its contents cannot be decoded.
struct SectionFailure
{
    std::string message;
};

class Cursor
{
    template <typename Fn>
    auto leb(Fn fn)
    {
        try
        {
            auto [value, next] = fn(m_bytes.first(m_end), m_pos);
            m_pos = next;
            return value;
        }
        catch (const Error& e)
        {
            throw SectionFailure{e.what()};
        }
    }

public:
    Cursor(ByteView bytes, size_t pos, size_t end) : m_bytes{bytes}, m_pos{pos}, m_end{end} {}

    size_t pos() const noexcept { return m_pos; }
    size_t end() const noexcept { return m_end; }
    bool at_end() const noexcept { return m_pos >= m_end; }

    uint8_t u8()
    {
        if (m_pos >= m_end)
            throw SectionFailure{"unexpected end of section"};
        return m_bytes[m_pos++];
    }

    uint32_t u32() { return leb([&](ByteView b, size_t p) { return decode_leb_u32(b, p); }); }
    uint64_t u64() { return leb([&](ByteView b, size_t p) { return decode_leb_u64(b, p); }); }
    int64_t s(unsigned bits)
    {
        return leb([&](ByteView b, size_t p) { return decode_leb_signed(b, p, bits); });
    }

    ByteView take(size_t n)
    {
        if (n > m_end - m_pos)
            throw SectionFailure{"length " + std::to_string(n) + " exceeds section"};
        auto out = m_bytes.subspan(m_pos, n);
        m_pos += n;
        return out;
    }

    /// Element count, bounded by the bytes left so hostile counts fail fast.
    uint32_t count(size_t min_item_size = 1)
    {
        const auto n = u32();
        if (min_item_size > 0 && n > (m_end - m_pos) / min_item_size)
            throw SectionFailure{"vector count " + std::to_string(n) + " exceeds section"};
        return n;
    }

private:
    ByteView m_bytes;
    size_t m_pos;
    size_t m_end;
};

bool valid_utf8(ByteView b)
{
    size_t i = 0;
    while (i < b.size())
    {
        const uint8_t c = b[i];
        size_t len = 0;
        uint32_t cp = 0;
        if (c < 0x80)
        {
            ++i;
            continue;
        }
        if ((c & 0xE0) == 0xC0)
            len = 2, cp = c & 0x1F;
        else if ((c & 0xF0) == 0xE0)
            len = 3, cp = c & 0x0F;
        else if ((c & 0xF8) == 0xF0)
            len = 4, cp = c & 0x07;
        else
            return false;
        if (i + len > b.size())
            return false;
        for (size_t k = 1; k < len; ++k)
        {
            if ((b[i + k] & 0xC0) != 0x80)
                return false;
            cp = (cp << 6) | (b[i + k] & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
            cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
            return false;
        i += len;
    }
    return true;
}

/// Name decoding keeps going on invalid UTF-8: bad bytes become U+FFFD and
/// `ok` is cleared.
std::string read_name(Cursor& c, bool& ok)
{
    const auto len = c.u32();
    const auto raw = c.take(len);
    if (valid_utf8(raw))
        return std::string{as_chars(raw)};
    ok = false;
    std::string out;
    for (const auto b : raw)
    {
        if (b < 0x80)
            out.push_back(static_cast<char>(b));
        else
            out += "\xEF\xBF\xBD";
    }
    return out;
}

ValType read_valtype(Cursor& c)
{
    const auto b = c.u8();
    const auto t = valtype_from_byte(b);
    if (!t)
        throw SectionFailure{"unknown value type 0x" + to_hex(std::span{&b, 1})};
    return *t;
}

Limits read_limits(Cursor& c)
{
    const auto flags = c.u8();
    if (flags > 0x07)
        throw SectionFailure{"unknown limits flags"};
    Limits l;
    l.shared = (flags & 0x02) != 0;
    const bool is64 = (flags & 0x04) != 0;
    auto read = [&]() -> uint32_t {
        if (!is64)
            return c.u32();
        return static_cast<uint32_t>(std::min<uint64_t>(c.u64(), UINT32_MAX));
    };
    l.min = read();
    if (flags & 0x01)
        l.max = read();
    return l;
}

ConstExpr read_const_expr(Cursor& c)
{
    ConstExpr e;
    size_t instructions = 0;
    while (true)
    {
        const auto op = c.u8();
        if (op == 0x0B)
            break;
        ++instructions;
        switch (op)
        {
        case 0x41:
            e = {ConstExpr::Kind::I32Const, c.s(32)};
            break;
        case 0x42:
            e = {ConstExpr::Kind::I64Const, c.s(64)};
            break;
        case 0x43:
            c.take(4);
            e = {ConstExpr::Kind::F32Const, 0};
            break;
        case 0x44:
            c.take(8);
            e = {ConstExpr::Kind::F64Const, 0};
            break;
        case 0x23:
            e = {ConstExpr::Kind::GlobalGet, c.u32()};
            break;
        case 0xD0:
            c.u8();
            e = {ConstExpr::Kind::RefNull, 0};
            break;
        case 0xD2:
            e = {ConstExpr::Kind::RefFunc, c.u32()};
            break;
        case 0x6A:  // extended-const arithmetic
        case 0x6B:
        case 0x6C:
        case 0x7C:
        case 0x7D:
        case 0x7E:
            break;
        default:
            throw SectionFailure{"unsupported opcode in constant expression"};
        }
    }
    if (instructions != 1)
        e = {ConstExpr::Kind::Other, 0};
    return e;
}

/// Canonical order of non-custom sections (datacount sits before code).
int section_rank(uint8_t id)
{
    switch (id)
    {
    case 1:
    case 2:
    case 3:
    case 4:
    case 5:
    case 6:
    case 7:
    case 8:
    case 9:
        return id;
    case 12:
        return 10;
    case 10:
        return 11;
    case 11:
        return 12;
    default:
        return -1;
    }
}

struct SectionParser
{
    ByteView input;
    WasmModule& m;
    std::vector<std::string> soft;  ///< recoverable problems in the current section
    std::optional<uint32_t> data_count;

    void check_func_index(uint32_t idx, std::string_view what)
    {
        if (idx >= m.function_count())
            throw SectionFailure{std::string{what} + " function index " + std::to_string(idx) + " out of range"};
    }

    void parse(uint8_t id, Cursor& c)
    {
        switch (id)
        {
        case 1:
            return types(c);
        case 2:
            return imports(c);
        case 3:
            return functions(c);
        case 4:
            return tables(c);
        case 5:
            return memories(c);
        case 6:
            return globals(c);
        case 7:
            return exports(c);
        case 8:
            return start(c);
        case 9:
            return elements(c);
        case 10:
            return code(c);
        case 11:
            return data(c);
        case 12:
            data_count = c.u32();
            return;
        default:
            throw SectionFailure{"unexpected section id"};
        }
    }

    void types(Cursor& c)
    {
        std::vector<FuncSig> out;
        const auto n = c.count(3);
        for (uint32_t i = 0; i < n; ++i)
        {
            if (c.u8() != 0x60)
                throw SectionFailure{"only function types are supported"};
            FuncSig sig;
            for (auto k = c.count(); k > 0; --k)
                sig.params.push_back(read_valtype(c));
            for (auto k = c.count(); k > 0; --k)
                sig.results.push_back(read_valtype(c));
            out.push_back(std::move(sig));
        }
        m.types = std::move(out);
    }

    void imports(Cursor& c)
    {
        std::vector<ImportEntry> out;
        const auto n = c.count(4);
        bool names_ok = true;
        for (uint32_t i = 0; i < n; ++i)
        {
            ImportEntry e;
            e.module = read_name(c, names_ok);
            e.name = read_name(c, names_ok);
            const auto kind = c.u8();
            switch (kind)
            {
            case 0x00:
                e.kind = ExternKind::Func;
                e.type_index = c.u32();
                if (e.type_index < m.types.size())
                    e.sig = m.types[e.type_index];
                else
                    soft.push_back("import " + std::to_string(i) + " has unknown type index");
                break;
            case 0x01:
                e.kind = ExternKind::Table;
                e.table = TableType{read_valtype(c), {}};
                e.table->limits = read_limits(c);
                break;
            case 0x02:
                e.kind = ExternKind::Memory;
                e.memory = read_limits(c);
                break;
            case 0x03:
            {
                e.kind = ExternKind::Global;
                const auto t = read_valtype(c);
                e.global = GlobalType{t, c.u8() != 0};
                break;
            }
            default:
                throw SectionFailure{"unknown import kind " + std::to_string(kind)};
            }
            out.push_back(std::move(e));
        }
        if (!names_ok)
            soft.push_back("import name is not valid UTF-8");
        m.imports = std::move(out);
    }

    void functions(Cursor& c)
    {
        std::vector<uint32_t> out;
        const auto n = c.count();
        for (uint32_t i = 0; i < n; ++i)
        {
            out.push_back(c.u32());
            if (out.back() >= m.types.size())
                soft.push_back("function " + std::to_string(i) + " has unknown type index");
        }
        m.functions = std::move(out);
    }

    void tables(Cursor& c)
    {
        std::vector<TableType> out;
        for (auto n = c.count(2); n > 0; --n)
        {
            TableType t;
            t.elem = read_valtype(c);
            t.limits = read_limits(c);
            out.push_back(t);
        }
        m.tables = std::move(out);
    }

    void memories(Cursor& c)
    {
        std::vector<Limits> out;
        for (auto n = c.count(2); n > 0; --n)
            out.push_back(read_limits(c));
        m.memories = std::move(out);
    }

    void globals(Cursor& c)
    {
        std::vector<Global> out;
        for (auto n = c.count(3); n > 0; --n)
        {
            Global g;
            g.type.type = read_valtype(c);
            g.type.mut = c.u8() != 0;
            g.init = read_const_expr(c);
            out.push_back(g);
        }
        m.globals = std::move(out);
    }

    size_t count_of(ExternKind k) const
    {
        size_t imported = 0;
        for (const auto& i : m.imports)
            imported += i.kind == k;
        switch (k)
        {
        case ExternKind::Func:
            return imported + m.functions.size();
        case ExternKind::Table:
            return imported + m.tables.size();
        case ExternKind::Memory:
            return imported + m.memories.size();
        case ExternKind::Global:
            return imported + m.globals.size();
        }
        return imported;
    }

    void exports(Cursor& c)
    {
        std::vector<ExportEntry> out;
        std::set<std::string> names;
        bool names_ok = true;
        const auto n = c.count(3);
        for (uint32_t i = 0; i < n; ++i)
        {
            ExportEntry e;
            e.name = read_name(c, names_ok);
            const auto kind = c.u8();
            e.index = c.u32();
            if (kind > 3)
            {
                soft.push_back("export '" + e.name + "' has unknown kind " + std::to_string(kind));
                continue;
            }
            e.kind = static_cast<ExternKind>(kind);
            if (e.index >= count_of(e.kind))
            {
                soft.push_back("export '" + e.name + "' index out of range");
                continue;
            }
            if (!names.insert(e.name).second)
            {
                soft.push_back("duplicate export name '" + e.name + "'");
                continue;
            }
            out.push_back(std::move(e));
        }
        if (!names_ok)
            soft.push_back("export name is not valid UTF-8");
        m.exports = std::move(out);
    }

    void start(Cursor& c)
    {
        const auto idx = c.u32();
        check_func_index(idx, "start");
        m.start = idx;
    }

    void elements(Cursor& c)
    {
        std::vector<ElementSegment> out;
        const auto n = c.count(2);
        for (uint32_t i = 0; i < n; ++i)
        {
            ElementSegment seg;
            const auto flags = c.u32();
            if (flags > 7)
                throw SectionFailure{"unknown element segment flags"};
            const bool passive_or_declarative = (flags & 0x01) != 0;
            const bool explicit_table = (flags & 0x02) != 0;
            const bool uses_exprs = (flags & 0x04) != 0;
            if (passive_or_declarative)
                seg.mode = explicit_table ? ElementSegment::Mode::Declarative : ElementSegment::Mode::Passive;
            else
            {
                if (explicit_table)
                    seg.table_index = c.u32();
                seg.offset = read_const_expr(c);
            }
            if (passive_or_declarative || explicit_table)
            {
                // elemkind (0x00) or reftype
                c.u8();
            }
            const auto items = c.count();
            for (uint32_t k = 0; k < items; ++k)
            {
                if (uses_exprs)
                {
                    const auto e = read_const_expr(c);
                    if (e.kind == ConstExpr::Kind::RefFunc)
                        seg.functions.push_back(static_cast<uint32_t>(e.value));
                }
                else
                    seg.functions.push_back(c.u32());
            }
            for (const auto f : seg.functions)
            {
                if (f >= m.function_count())
                    soft.push_back("element segment " + std::to_string(i) + " references unknown function");
            }
            out.push_back(std::move(seg));
        }
        m.elements = std::move(out);
    }

    void code(Cursor& c)
    {
        std::vector<FuncBody> out;
        const auto n = c.count(2);
        for (uint32_t i = 0; i < n; ++i)
        {
            const auto size = c.u32();
            const auto body_start = c.pos();
            c.take(size);
            Cursor body{input, body_start, body_start + size};
            FuncBody f;
            for (auto decls = body.count(2); decls > 0; --decls)
            {
                LocalDecl d;
                d.count = body.u32();
                d.type = read_valtype(body);
                f.locals.push_back(d);
            }
            f.code_offset = body.pos();
            f.code_size = body.end() - body.pos();
            const auto summary = walk_body(input.subspan(f.code_offset, f.code_size));
            f.calls = summary.calls;
            f.has_call_indirect = summary.has_call_indirect;
            f.opaque = summary.opaque;
            out.push_back(std::move(f));
        }
        if (out.size() != m.functions.size())
            soft.push_back("code section has " + std::to_string(out.size()) + " bodies for " +
                           std::to_string(m.functions.size()) + " declared functions");
        m.code = std::move(out);
    }

    void data(Cursor& c)
    {
        std::vector<DataSegment> out;
        const auto n = c.count(2);
        for (uint32_t i = 0; i < n; ++i)
        {
            DataSegment seg;
            const auto flags = c.u32();
            switch (flags)
            {
            case 0:
                seg.offset = read_const_expr(c);
                break;
            case 1:
                seg.passive = true;
                break;
            case 2:
                seg.memory_index = c.u32();
                seg.offset = read_const_expr(c);
                break;
            default:
                throw SectionFailure{"unknown data segment flags"};
            }
            const auto len = c.u32();
            seg.file_offset = c.pos();
            const auto bytes = c.take(len);
            seg.bytes.assign(bytes.begin(), bytes.end());
            if (!seg.passive)
                seg.resolved_offset = resolve(seg.offset);
            out.push_back(std::move(seg));
        }
        if (data_count && *data_count != out.size())
            soft.push_back("data count section disagrees with data section");
        m.data = std::move(out);
    }

    std::optional<uint32_t> resolve(const ConstExpr& e) const
    {
        if (e.kind == ConstExpr::Kind::I32Const)
            return static_cast<uint32_t>(e.value);
        if (e.kind == ConstExpr::Kind::GlobalGet)
        {
            const auto imported = count_of(ExternKind::Global) - m.globals.size();
            const auto idx = static_cast<uint64_t>(e.value);
            if (idx >= imported && idx - imported < m.globals.size())
            {
                const auto& g = m.globals[idx - imported];
                if (g.init.kind == ConstExpr::Kind::I32Const)
                    return static_cast<uint32_t>(g.init.value);
            }
        }
        return std::nullopt;
    }
};

struct Snapshot
{
    explicit Snapshot(const WasmModule& m) : saved{m} {}
    WasmModule saved;
};
}  // namespace

std::string_view to_string(ValType t) noexcept
{
    switch (t)
    {
    case ValType::I32:
        return "i32";
    case ValType::I64:
        return "i64";
    case ValType::F32:
        return "f32";
    case ValType::F64:
        return "f64";
    case ValType::V128:
        return "v128";
    case ValType::FuncRef:
        return "funcref";
    case ValType::ExternRef:
        return "externref";
    }
    return "?";
}

std::optional<ValType> valtype_from_byte(uint8_t b) noexcept
{
    switch (b)
    {
    case 0x7F:
    case 0x7E:
    case 0x7D:
    case 0x7C:
    case 0x7B:
    case 0x70:
    case 0x6F:
        return static_cast<ValType>(b);
    default:
        return std::nullopt;
    }
}

std::optional<ValType> valtype_from_string(std::string_view s) noexcept
{
    for (const auto t : {ValType::I32, ValType::I64, ValType::F32, ValType::F64, ValType::V128,
             ValType::FuncRef, ValType::ExternRef})
    {
        if (to_string(t) == s)
            return t;
    }
    return std::nullopt;
}

std::string to_string(const FuncSig& sig)
{
    auto list = [](const std::vector<ValType>& v) {
        std::string s = "(";
        for (size_t i = 0; i < v.size(); ++i)
        {
            if (i)
                s += ", ";
            s += to_string(v[i]);
        }
        return s + ")";
    };
    return list(sig.params) + " -> " + list(sig.results);
}

std::string_view to_string(ExternKind k) noexcept
{
    switch (k)
    {
    case ExternKind::Func:
        return "func";
    case ExternKind::Table:
        return "table";
    case ExternKind::Memory:
        return "memory";
    case ExternKind::Global:
        return "global";
    }
    return "?";
}

std::string_view section_name(uint8_t id) noexcept
{
    static constexpr std::string_view names[] = {"custom", "type", "import", "function", "table",
        "memory", "global", "export", "start", "element", "code", "data", "datacount"};
    return id < std::size(names) ? names[id] : "unknown";
}

size_t WasmModule::imported_function_count() const noexcept
{
    return static_cast<size_t>(std::count_if(
        imports.begin(), imports.end(), [](const ImportEntry& i) { return i.kind == ExternKind::Func; }));
}

bool WasmModule::has_malformed_section() const noexcept
{
    return std::any_of(sections.begin(), sections.end(), [](const SectionInfo& s) { return s.malformed; });
}

std::optional<FuncSig> WasmModule::function_sig(uint32_t func_index) const
{
    uint32_t seen = 0;
    for (const auto& imp : imports)
    {
        if (imp.kind != ExternKind::Func)
            continue;
        if (seen++ == func_index)
            return imp.sig;
    }
    const uint64_t local = func_index - static_cast<uint64_t>(seen);
    if (func_index < seen || local >= functions.size() || functions[local] >= types.size())
        return std::nullopt;
    return types[functions[local]];
}

WasmModule parse_module(ByteView bytes, ParseMode mode)
{
    if (bytes.size() < 4 || !std::equal(kWasmMagic.begin(), kWasmMagic.end(), bytes.begin()))
        throw Error{ErrorCode::InvalidMagic, "missing \\0asm magic"};
    if (bytes.size() < kWasmHeaderSize)
        throw Error{ErrorCode::InvalidVersion, "header truncated before version"};
    WasmModule m;
    m.version = read_u32le(bytes, 4);
    if (m.version != 1)
        throw Error{ErrorCode::InvalidVersion, "unsupported version " + std::to_string(m.version)};

    SectionParser parser{bytes, m, {}, {}};
    std::set<uint8_t> seen;
    int last_rank = 0;
    size_t pos = kWasmHeaderSize;
    m.consumed = pos;
    const bool prefix = mode == ParseMode::Prefix;

    while (pos < bytes.size())
    {
        const size_t section_start = pos;
        const uint8_t id = bytes[pos];
        uint32_t size = 0;
        size_t payload = 0;
        try
        {
            std::tie(size, payload) = decode_leb_u32(bytes, pos + 1);
        }
        catch (const Error& e)
        {
            if (prefix)
                break;
            throw Error{ErrorCode::TruncatedSection, "section header at " + std::to_string(pos) + ": " + e.what()};
        }
        if (size > bytes.size() - payload)
        {
            if (prefix)
                break;
            throw Error{ErrorCode::TruncatedSection, std::string{section_name(id)} + " section at " +
                                                         std::to_string(pos) + " needs " +
                                                         std::to_string(size) + " bytes"};
        }

        SectionInfo info{id, section_start, payload, size, false, {}};
        const size_t end = payload + size;
        const int rank = section_rank(id);

        if (id == 0)
        {
            Cursor c{bytes, payload, end};
            bool ok = true;
            bool readable = true;
            CustomSection cs;
            try
            {
                cs.name = read_name(c, ok);
                cs.file_offset = c.pos();
                const auto rest = c.take(end - c.pos());
                cs.bytes.assign(rest.begin(), rest.end());
            }
            catch (const SectionFailure& f)
            {
                readable = false;
                info.error = f.message;
            }
            // In prefix mode an implausible name most likely means host bytes.
            const bool plausible = readable && ok && !cs.name.empty() &&
                std::all_of(cs.name.begin(), cs.name.end(), [](char ch) {
                    const auto u = static_cast<unsigned char>(ch);
                    return u > 0x20 && u != 0x7F;
                });
            if (prefix && !plausible)
                break;
            if (!readable || !ok)
            {
                info.malformed = true;
                if (info.error.empty())
                    info.error = "custom section name is not valid UTF-8";
            }
            if (readable)
                m.customs.push_back(std::move(cs));
        }
        else if (rank < 0)
        {
            if (prefix)
                break;
            const auto raw = bytes.subspan(payload, size);
            m.unknown_sections.push_back({id, Bytes{raw.begin(), raw.end()}, payload});
        }
        else
        {
            const bool duplicate = !seen.insert(id).second;
            const bool out_of_order = rank <= last_rank;
            if (prefix && (duplicate || out_of_order))
                break;
            if (duplicate)
            {
                info.malformed = true;
                info.error = "duplicate section";
            }
            else
            {
                const Snapshot snapshot{m};
                parser.soft.clear();
                try
                {
                    Cursor c{bytes, payload, end};
                    parser.parse(id, c);
                    if (!c.at_end())
                        throw SectionFailure{"section size mismatch"};
                }
                catch (const SectionFailure& f)
                {
                    if (prefix)
                    {
                        m = snapshot.saved;
                        break;
                    }
                    m = snapshot.saved;
                    info.malformed = true;
                    info.error = f.message;
                }
                if (!info.malformed && !parser.soft.empty())
                {
                    info.malformed = true;
                    info.error = parser.soft.front();
                }
                if (out_of_order && !info.malformed)
                {
                    info.malformed = true;
                    info.error = "section out of order";
                }
                last_rank = std::max(last_rank, rank);
            }
        }
        m.sections.push_back(std::move(info));
        pos = end;
        m.consumed = pos;
    }
    return m;
}

std::vector<FunctionRef> function_index_map(const WasmModule& m)
{
    std::vector<FunctionRef> out;
    out.reserve(m.function_count());
    for (uint32_t i = 0; i < m.imports.size(); ++i)
    {
        if (m.imports[i].kind == ExternKind::Func)
            out.emplace_back(ImportedFunction{m.imports[i].module, m.imports[i].name, i});
    }
    for (uint32_t i = 0; i < m.functions.size(); ++i)
        out.emplace_back(LocalFunction{i});
    return out;
}
}  // namespace wasmdroid
