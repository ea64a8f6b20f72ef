// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/leb128.hpp>
#include <wasmdroid/wasm.hpp>
#include <sstream>

namespace wasmdroid
{
namespace
{
enum class Imm
{
    None,
    BlockType,
    Index,       // one u32
    TwoIndices,  // two u32
    BrTable,
    MemArg,
    I32,
    I64,
    F32,
    F64,
    Unsupported,
};

Imm immediate_of(uint8_t op) noexcept
{
    if (op >= 0x28 && op <= 0x3E)
        return Imm::MemArg;
    if (op >= 0x45 && op <= 0xC4)
        return Imm::None;
    switch (op)
    {
    case 0x00:
    case 0x01:
    case 0x05:
    case 0x0B:
    case 0x0F:
    case 0x1A:
    case 0x1B:
        return Imm::None;
    case 0x02:
    case 0x03:
    case 0x04:
        return Imm::BlockType;
    case 0x0C:
    case 0x0D:
    case 0x10:
    case 0x20:
    case 0x21:
    case 0x22:
    case 0x23:
    case 0x24:
    case 0x3F:
    case 0x40:
        return Imm::Index;
    case 0x0E:
        return Imm::BrTable;
    case 0x11:
        return Imm::TwoIndices;
    case 0x41:
        return Imm::I32;
    case 0x42:
        return Imm::I64;
    case 0x43:
        return Imm::F32;
    case 0x44:
        return Imm::F64;
    default:
        return Imm::Unsupported;
    }
}

/// Immediate count (u32 each) of 0xFC sub-opcodes 0..17, -1 if unknown.
int fc_immediates(uint32_t sub) noexcept
{
    static constexpr int table[] = {0, 0, 0, 0, 0, 0, 0, 0, 2, 1, 2, 1, 2, 1, 2, 1, 1, 1};
    return sub < std::size(table) ? table[sub] : -1;
}

std::string preview(const Bytes& bytes)
{
    constexpr size_t limit = 64;
    std::string out;
    for (size_t i = 0; i < bytes.size() && i < limit; ++i)
    {
        const auto c = static_cast<char>(bytes[i]);
        if (c == '"' || c == '\\')
            out += '\\';
        out += (bytes[i] >= 0x20 && bytes[i] < 0x7F) ? c : '.';
    }
    if (bytes.size() > limit)
        out += "...";
    return out;
}

std::string render_const(const ConstExpr& e)
{
    switch (e.kind)
    {
    case ConstExpr::Kind::I32Const:
        return "i32.const " + std::to_string(e.value);
    case ConstExpr::Kind::I64Const:
        return "i64.const " + std::to_string(e.value);
    case ConstExpr::Kind::F32Const:
        return "f32.const";
    case ConstExpr::Kind::F64Const:
        return "f64.const";
    case ConstExpr::Kind::GlobalGet:
        return "global.get " + std::to_string(e.value);
    case ConstExpr::Kind::RefNull:
        return "ref.null";
    case ConstExpr::Kind::RefFunc:
        return "ref.func " + std::to_string(e.value);
    case ConstExpr::Kind::Other:
        break;
    }
    return "expr";
}

std::string render_limits(const Limits& l)
{
    std::string s = "min=" + std::to_string(l.min);
    if (l.max)
        s += " max=" + std::to_string(*l.max);
    if (l.shared)
        s += " shared";
    return s;
}

std::string render_list(const std::vector<uint32_t>& v)
{
    std::string s = "[";
    for (size_t i = 0; i < v.size(); ++i)
    {
        if (i)
            s += ",";
        s += std::to_string(v[i]);
    }
    return s + "]";
}
}  // namespace

std::optional<Instruction> decode_instruction(ByteView code, size_t pos)
{
    if (pos >= code.size())
        return std::nullopt;
    Instruction ins;
    const uint8_t op = code[pos];
    ins.opcode = op;
    size_t p = pos + 1;
    try
    {
        auto u32 = [&] {
            auto [v, next] = decode_leb_u32(code, p);
            p = next;
            return v;
        };
        auto skip = [&](size_t n) {
            if (code.size() - p < n)
                throw Error{ErrorCode::UnexpectedEof, "immediate"};
            p += n;
        };
        switch (immediate_of(op))
        {
        case Imm::None:
            break;
        case Imm::BlockType:
        {
            if (p >= code.size())
                return std::nullopt;
            const uint8_t b = code[p];
            if (b == 0x40 || valtype_from_byte(b))
                ++p;
            else
            {
                auto [v, next] = decode_leb_signed(code, p, 33);
                if (v < 0)
                    return std::nullopt;
                p = next;
            }
            break;
        }
        case Imm::Index:
        {
            const auto idx = u32();
            if (op == 0x10)
                ins.call_target = idx;
            break;
        }
        case Imm::TwoIndices:
            u32();
            u32();
            ins.call_indirect = op == 0x11;
            break;
        case Imm::BrTable:
        {
            const auto n = u32();
            if (n > code.size() - p)
                return std::nullopt;
            for (uint32_t i = 0; i <= n; ++i)
                u32();
            break;
        }
        case Imm::MemArg:
        {
            const auto align = u32();
            if (align & 0x40)
                u32();  // multi-memory index
            p = decode_leb_u64(code, p).second;
            break;
        }
        case Imm::I32:
            p = decode_leb_signed(code, p, 32).second;
            break;
        case Imm::I64:
            p = decode_leb_signed(code, p, 64).second;
            break;
        case Imm::F32:
            skip(4);
            break;
        case Imm::F64:
            skip(8);
            break;
        case Imm::Unsupported:
            if (op != 0xFC)
                return std::nullopt;
            {
                const auto sub = u32();
                const int n = fc_immediates(sub);
                if (n < 0)
                    return std::nullopt;
                ins.opcode = 0xFC00 | sub;
                for (int i = 0; i < n; ++i)
                    u32();
            }
            break;
        }
    }
    catch (const Error&)
    {
        return std::nullopt;
    }
    ins.next = p;
    return ins;
}

BodySummary walk_body(ByteView code)
{
    BodySummary s;
    size_t pos = 0;
    while (pos < code.size())
    {
        const auto ins = decode_instruction(code, pos);
        if (!ins)
        {
            s.opaque = true;
            break;
        }
        if (ins->call_target)
            s.calls.push_back(*ins->call_target);
        if (ins->call_indirect)
            s.has_call_indirect = true;
        pos = ins->next;
    }
    return s;
}

std::string dump_structure(const WasmModule& m)
{
    std::ostringstream out;
    out << "module version=" << m.version << " size=" << m.consumed << "\n";
    for (const auto& s : m.sections)
    {
        out << "section " << section_name(s.id) << " id=" << unsigned{s.id} << " offset=" << s.offset
            << " size=" << s.payload_size;
        if (s.malformed)
            out << " malformed: " << s.error;
        out << "\n";
    }
    for (size_t i = 0; i < m.types.size(); ++i)
        out << "type[" << i << "] " << to_string(m.types[i]) << "\n";
    for (size_t i = 0; i < m.imports.size(); ++i)
    {
        const auto& imp = m.imports[i];
        out << "import[" << i << "] " << to_string(imp.kind) << " " << imp.module << "." << imp.name;
        if (imp.kind == ExternKind::Func)
            out << " : " << (imp.sig ? to_string(*imp.sig) : "type " + std::to_string(imp.type_index));
        else if (imp.memory)
            out << " " << render_limits(*imp.memory);
        else if (imp.table)
            out << " " << to_string(imp.table->elem) << " " << render_limits(imp.table->limits);
        else if (imp.global)
            out << " " << to_string(imp.global->type) << " mut=" << imp.global->mut;
        out << "\n";
    }
    const auto imported = m.imported_function_count();
    for (size_t i = 0; i < m.functions.size(); ++i)
    {
        out << "func[" << imported + i << "] type=" << m.functions[i];
        if (i < m.code.size())
        {
            const auto& b = m.code[i];
            out << " body=" << b.code_size << " calls=" << render_list(b.calls);
            if (b.has_call_indirect)
                out << " call_indirect";
            if (b.opaque)
                out << " opaque";
        }
        out << "\n";
    }
    for (size_t i = 0; i < m.tables.size(); ++i)
        out << "table[" << i << "] " << to_string(m.tables[i].elem) << " " << render_limits(m.tables[i].limits)
            << "\n";
    for (size_t i = 0; i < m.memories.size(); ++i)
        out << "memory[" << i << "] " << render_limits(m.memories[i]) << "\n";
    for (size_t i = 0; i < m.globals.size(); ++i)
        out << "global[" << i << "] " << to_string(m.globals[i].type.type) << " mut=" << m.globals[i].type.mut
            << " init=" << render_const(m.globals[i].init) << "\n";
    for (const auto& e : m.exports)
        out << "export " << to_string(e.kind) << " " << e.name << " (idx " << e.index << ")\n";
    if (m.start)
        out << "start " << *m.start << "\n";
    for (size_t i = 0; i < m.elements.size(); ++i)
    {
        const auto& e = m.elements[i];
        out << "elem[" << i << "] ";
        switch (e.mode)
        {
        case ElementSegment::Mode::Active:
            out << "active table=" << e.table_index << " @" << render_const(e.offset);
            break;
        case ElementSegment::Mode::Passive:
            out << "passive";
            break;
        case ElementSegment::Mode::Declarative:
            out << "declarative";
            break;
        }
        out << " funcs=" << render_list(e.functions) << "\n";
    }
    for (size_t i = 0; i < m.data.size(); ++i)
    {
        const auto& d = m.data[i];
        out << "data[" << i << "] ";
        if (d.passive)
            out << "passive";
        else if (d.resolved_offset)
            out << "@" << *d.resolved_offset;
        else
            out << "@(" << render_const(d.offset) << ")";
        out << " len=" << d.bytes.size() << " \"" << preview(d.bytes) << "\"\n";
    }
    for (const auto& c : m.customs)
        out << "custom " << c.name << " size=" << c.bytes.size() << "\n";
    for (const auto& u : m.unknown_sections)
        out << "unknown id=" << unsigned{u.id} << " size=" << u.bytes.size() << "\n";
    return out.str();
}
}  // namespace wasmdroid
