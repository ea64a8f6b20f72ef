// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <wasmdroid/bytes.hpp>
#include <wasmdroid/wasm.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

/// Builders for inert fixture binaries. Function bodies are call chains; no
/// emitted module does anything beyond calling its imports.
namespace wasmdroid::testkit
{
namespace op
{
struct Call
{
    uint32_t func = 0;
};
/// Calls through table 0 with the given type index; pushes i32.const 0 first.
struct CallIndirect
{
    uint32_t type = 0;
};
struct I32Const
{
    int32_t value = 0;
};
struct Drop
{};
struct End
{};
/// Emitted verbatim; exists to produce undecodable bodies.
struct RawByte
{
    uint8_t byte = 0;
};
}  // namespace op

using Op = std::variant<op::Call, op::CallIndirect, op::I32Const, op::Drop, op::End, op::RawByte>;

struct ImportSpec
{
    std::string module;
    std::string name;
    FuncSig sig;
};

struct FuncSpec
{
    FuncSig sig;
    std::vector<Op> body;  ///< a trailing End is added when missing
};

struct ExportSpec
{
    std::string name;
    uint32_t func = 0;
};

struct DataSpec
{
    std::optional<uint32_t> offset;  ///< nullopt: passive segment
    Bytes bytes;
};

struct CustomSpec
{
    std::string name;
    Bytes bytes;
};

struct ModuleSpec
{
    std::vector<ImportSpec> imports;
    std::vector<FuncSpec> funcs;
    std::vector<ExportSpec> exports;
    std::vector<DataSpec> data;
    std::vector<CustomSpec> customs;
    /// Function indices placed in table 0 by one active element segment.
    std::vector<uint32_t> table;
};

/// Throws IndexOutOfRange when a call, export or table entry names a
/// function outside the index space, or CallIndirect names an unknown type.
/// CallIndirect without table entries still gets an (empty) table.
Bytes emit_module(const ModuleSpec& spec);

/// Structural comparison of a parsed module with the ModuleSpec it was emitted
/// from. On mismatch returns false and describes the first difference.
bool matches_spec(const ModuleSpec& spec, const WasmModule& m, std::string* why = nullptr);

/// Calls a spec's body makes, in order (RawByte stops the list, as the
/// walker would).
std::vector<uint32_t> expected_calls(const FuncSpec& f);

struct DexSpec
{
    std::vector<std::string> strings;
    /// Bytes placed in the data section after the string data.
    Bytes payload;
};

struct EmittedDex
{
    Bytes bytes;
    uint32_t payload_offset = 0;
};

EmittedDex emit_dex(const DexSpec& spec);
Bytes emit_dex_with_strings(const std::vector<std::string>& strings);

struct ZipEntrySpec
{
    std::string path;
    Bytes bytes;
    uint16_t method = 0;  ///< 0 stored, 8 deflate; anything else is written stored-as-is
    std::optional<uint32_t> crc_override;
};

Bytes emit_zip(const std::vector<ZipEntrySpec>& entries);

/// Raw DEFLATE (no zlib header).
Bytes deflate_raw(ByteView data);

/// Fake ELF shared object with the given strings in a NUL-separated table,
/// optionally with `payload` placed after it.
Bytes emit_native_blob(const std::vector<std::string>& strings, ByteView payload = {});
}  // namespace wasmdroid::testkit
