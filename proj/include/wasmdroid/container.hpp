// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "bytes.hpp"
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid
{
enum class FileClass
{
    Manifest,
    Dex,
    NativeLib,
    Asset,
    HtmlJs,
    WasmFile,
    Resource,
    Other,
    UnsupportedCompression,
};

std::string_view to_string(FileClass c) noexcept;
std::optional<FileClass> file_class_from_string(std::string_view s) noexcept;

inline constexpr uint16_t kMethodStored = 0;
inline constexpr uint16_t kMethodDeflate = 8;

/// One central-directory record. The path is kept byte-for-byte as stored.
struct ArchiveEntry
{
    std::string path;
    uint32_t compressed_size = 0;
    uint32_t uncompressed_size = 0;
    uint16_t method = 0;
    uint32_t crc32 = 0;
    uint32_t offset = 0;  ///< local header offset
    uint32_t occurrence = 0;  ///< ordinal among records sharing this path
};

/// Classified listing of an APK. Immutable after open_archive(); reading entry
/// bytes is safe from several threads at once.
class ApkInventory
{
public:
    const std::vector<ArchiveEntry>& entries() const noexcept { return m_entries; }
    const std::vector<FileClass>& classes() const noexcept { return m_classes; }
    FileClass class_of(size_t entry_index) const { return m_classes.at(entry_index); }
    /// Paths with two or more central-directory records, in first-seen order.
    const std::vector<std::string>& duplicates() const noexcept { return m_duplicates; }
    /// Directory records that were skipped (e.g. empty names).
    const std::vector<std::string>& warnings() const noexcept { return m_warnings; }
    ByteView source() const noexcept { return *m_source; }

    /// Index of the `occurrence`-th record named `path`, if any.
    std::optional<size_t> find(std::string_view path, uint32_t occurrence = 0) const;

private:
    friend ApkInventory open_archive(Bytes bytes);

    std::shared_ptr<const Bytes> m_source;
    std::vector<ArchiveEntry> m_entries;
    std::vector<FileClass> m_classes;
    std::vector<std::string> m_duplicates;
    std::vector<std::string> m_warnings;
};

/// Decompressed entry contents. A CRC mismatch is reported, not thrown.
struct EntryPayload
{
    Bytes bytes;
    bool crc_ok = true;
};

/// Builds an inventory from the central directory.
/// Throws NotAZip when no end-of-central-directory record exists and
/// TruncatedArchive when the directory points past the end (ZIP64 included).
ApkInventory open_archive(Bytes bytes);

/// Throws NoSuchEntry, UnsupportedCompression, or TruncatedArchive when the
/// local record lies outside the file.
EntryPayload entry_bytes(const ApkInventory& inv, std::string_view path, uint32_t occurrence = 0);
EntryPayload entry_bytes(const ApkInventory& inv, size_t entry_index);

/// Streams an entry through `visit` in windows of `window` bytes. Each call
/// receives a buffer starting at absolute offset `base` whose first
/// `primary` bytes belong to this window; the remaining bytes (at most
/// `lookahead`) repeat the start of the next window so that matches straddling
/// the boundary stay visible. Memory use is bounded by window + lookahead.
using WindowVisitor = std::function<void(ByteView buffer, uint64_t base, size_t primary)>;
void for_each_window(const ApkInventory& inv, size_t entry_index, size_t window, size_t lookahead,
    const WindowVisitor& visit);

/// Pure, total classification. Magic bytes win over the extension for
/// WasmFile and Dex.
FileClass classify_entry(std::string_view path, ByteView head);
}  // namespace wasmdroid
