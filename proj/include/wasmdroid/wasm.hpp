// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wasmdroid
{
inline constexpr std::array<uint8_t, 4> kWasmMagic{0x00, 0x61, 0x73, 0x6D};
inline constexpr std::array<uint8_t, 4> kWasmVersion1{0x01, 0x00, 0x00, 0x00};
inline constexpr size_t kWasmHeaderSize = 8;

enum class ValType : uint8_t
{
    I32 = 0x7F,
    I64 = 0x7E,
    F32 = 0x7D,
    F64 = 0x7C,
    V128 = 0x7B,
    FuncRef = 0x70,
    ExternRef = 0x6F,
};

std::string_view to_string(ValType t) noexcept;
std::optional<ValType> valtype_from_byte(uint8_t b) noexcept;
std::optional<ValType> valtype_from_string(std::string_view s) noexcept;

struct FuncSig
{
    std::vector<ValType> params;
    std::vector<ValType> results;

    friend bool operator==(const FuncSig&, const FuncSig&) = default;
};

/// "(i32, i32) -> (i32)"
std::string to_string(const FuncSig& sig);

enum class ExternKind : uint8_t
{
    Func = 0,
    Table = 1,
    Memory = 2,
    Global = 3,
};

std::string_view to_string(ExternKind k) noexcept;

struct Limits
{
    uint32_t min = 0;
    std::optional<uint32_t> max;
    bool shared = false;

    friend bool operator==(const Limits&, const Limits&) = default;
};

struct TableType
{
    ValType elem = ValType::FuncRef;
    Limits limits;

    friend bool operator==(const TableType&, const TableType&) = default;
};

struct GlobalType
{
    ValType type = ValType::I32;
    bool mut = false;

    friend bool operator==(const GlobalType&, const GlobalType&) = default;
};

/// A constant expression. Only the single-instruction forms toolchains emit
/// are modelled; anything else is `Other`.
struct ConstExpr
{
    enum class Kind
    {
        I32Const,
        I64Const,
        F32Const,
        F64Const,
        GlobalGet,
        RefNull,
        RefFunc,
        Other,
    };
    Kind kind = Kind::Other;
    int64_t value = 0;  ///< constant, global index, or function index

    friend bool operator==(const ConstExpr&, const ConstExpr&) = default;
};

struct ImportEntry
{
    std::string module;
    std::string name;
    ExternKind kind = ExternKind::Func;
    uint32_t type_index = 0;  ///< kind == Func
    std::optional<FuncSig> sig;  ///< kind == Func and type index valid
    std::optional<TableType> table;
    std::optional<Limits> memory;
    std::optional<GlobalType> global;
};

struct ExportEntry
{
    std::string name;
    ExternKind kind = ExternKind::Func;
    uint32_t index = 0;

    friend bool operator==(const ExportEntry&, const ExportEntry&) = default;
};

struct Global
{
    GlobalType type;
    ConstExpr init;
};

struct ElementSegment
{
    enum class Mode
    {
        Active,
        Passive,
        Declarative,
    };
    Mode mode = Mode::Active;
    uint32_t table_index = 0;
    ConstExpr offset;
    /// Function indices referenced directly or through ref.func.
    std::vector<uint32_t> functions;
};

struct DataSegment
{
    uint32_t memory_index = 0;
    bool passive = false;
    ConstExpr offset;  ///< meaningless when passive
    /// Linear-memory address when the offset is i32.const, or global.get of
    /// a module-defined global initialised by i32.const.
    std::optional<uint32_t> resolved_offset;
    Bytes bytes;
    size_t file_offset = 0;  ///< position of `bytes` in the parsed input
};

struct LocalDecl
{
    uint32_t count = 0;
    ValType type = ValType::I32;
};

struct FuncBody
{
    std::vector<LocalDecl> locals;
    size_t code_offset = 0;  ///< instruction bytes within the parsed input
    size_t code_size = 0;
    std::vector<uint32_t> calls;
    bool has_call_indirect = false;
    bool opaque = false;
};

struct CustomSection
{
    std::string name;
    Bytes bytes;
    size_t file_offset = 0;
};

/// Section with an id the parser does not know, kept verbatim.
struct OpaqueSection
{
    uint8_t id = 0;
    Bytes bytes;
    size_t file_offset = 0;
};

struct SectionInfo
{
    uint8_t id = 0;
    size_t offset = 0;  ///< of the id byte
    size_t payload_offset = 0;
    size_t payload_size = 0;
    bool malformed = false;
    std::string error;
};

std::string_view section_name(uint8_t id) noexcept;

struct WasmModule
{
    uint32_t version = 1;
    std::vector<FuncSig> types;
    std::vector<ImportEntry> imports;
    std::vector<uint32_t> functions;  ///< type index per local function
    std::vector<TableType> tables;
    std::vector<Limits> memories;
    std::vector<Global> globals;
    std::vector<ExportEntry> exports;
    std::optional<uint32_t> start;
    std::vector<ElementSegment> elements;
    std::vector<FuncBody> code;
    std::vector<DataSegment> data;
    std::vector<CustomSection> customs;
    std::vector<OpaqueSection> unknown_sections;
    std::vector<SectionInfo> sections;
    /// Bytes from the header up to the end of the last accepted section.
    size_t consumed = 0;

    size_t imported_function_count() const noexcept;
    size_t function_count() const noexcept { return imported_function_count() + functions.size(); }
    bool has_malformed_section() const noexcept;
    /// Signature of a function in the joint index space, if known.
    std::optional<FuncSig> function_sig(uint32_t func_index) const;
};

enum class ParseMode
{
    /// Whole input is one module; a section running past the end throws.
    Strict,
    /// Input is a module followed by arbitrary bytes; parsing stops before
    /// the first section that is out of order, truncated or malformed.
    Prefix,
};

/// Throws InvalidMagic, InvalidVersion, or (Strict only) TruncatedSection.
/// Malformed section contents are recorded in `sections` and do not throw.
WasmModule parse_module(ByteView bytes, ParseMode mode = ParseMode::Strict);

/// One decoded instruction.
struct Instruction
{
    uint32_t opcode = 0;  ///< prefixed opcodes are 0xFC00 | sub-opcode
    size_t next = 0;
    std::optional<uint32_t> call_target;
    bool call_indirect = false;
};

/// Decodes the instruction at `pos`. Returns nullopt for opcodes outside the
/// supported set (MVP, sign extension, 0xFC misc) or truncated immediates.
std::optional<Instruction> decode_instruction(ByteView code, size_t pos);

struct BodySummary
{
    std::vector<uint32_t> calls;
    bool has_call_indirect = false;
    bool opaque = false;

    friend bool operator==(const BodySummary&, const BodySummary&) = default;
};

/// Linear walk over an instruction sequence; stops at the first undecodable
/// instruction and reports it as opaque.
BodySummary walk_body(ByteView code);

struct ImportedFunction
{
    std::string module;
    std::string name;
    uint32_t import_index = 0;

    friend bool operator==(const ImportedFunction&, const ImportedFunction&) = default;
};

struct LocalFunction
{
    uint32_t body_index = 0;

    friend bool operator==(const LocalFunction&, const LocalFunction&) = default;
};

using FunctionRef = std::variant<ImportedFunction, LocalFunction>;

/// Function index space: imported functions first, then local ones.
std::vector<FunctionRef> function_index_map(const WasmModule& m);

/// objdump-like, line-oriented listing. Deterministic.
std::string dump_structure(const WasmModule& m);
}  // namespace wasmdroid
