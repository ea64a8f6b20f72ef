// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include "container.hpp"
#include "wasm.hpp"
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wasmdroid
{
enum class CarveStatus
{
    Parsed,
    MagicOnly,
};

std::string_view to_string(CarveStatus s) noexcept;

struct CarvedCandidate
{
    std::string source_path;
    uint32_t source_occurrence = 0;
    FileClass source_class = FileClass::Other;
    uint64_t offset = 0;
    uint64_t length = 0;  ///< 0 unless Parsed
    CarveStatus status = CarveStatus::MagicOnly;
    std::optional<WasmModule> module;
    Bytes bytes;  ///< source[offset, offset + length), Parsed only
    std::string failure;  ///< why parsing failed, for MagicOnly
};

/// Ascending offsets of every occurrence of 00 61 73 6D.
std::vector<uint64_t> scan_magic(ByteView bytes);

/// Parses the module starting at `offset` in prefix mode. Never reads outside
/// `bytes`; failures degrade to MagicOnly.
CarvedCandidate carve(ByteView bytes, uint64_t offset);

struct CarveOptions
{
    /// Entries whose decompressed size exceeds this are scanned in windows.
    uint64_t stream_threshold = 256ull << 20;
    size_t window = 64u << 20;
    /// Bytes of the following window kept visible; at least 3 so a magic
    /// straddling the boundary is found, larger so the module after it parses.
    size_t lookahead = 1u << 20;
    unsigned jobs = 1;
};

struct InventoryCarveResult
{
    std::vector<CarvedCandidate> candidates;  ///< ordered by (path, occurrence, offset)
    std::vector<std::string> warnings;
};

/// Carves every entry of the inventory. WasmFile entries starting with the
/// magic are carved at offset 0 first.
InventoryCarveResult scan_inventory(const ApkInventory& inv, const CarveOptions& options = {});
}  // namespace wasmdroid
