// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/error.hpp>

namespace wasmdroid
{
std::string_view to_string(ErrorCode code) noexcept
{
    switch (code)
    {
    case ErrorCode::NotAZip:
        return "NotAZip";
    case ErrorCode::TruncatedArchive:
        return "TruncatedArchive";
    case ErrorCode::NoSuchEntry:
        return "NoSuchEntry";
    case ErrorCode::UnsupportedCompression:
        return "UnsupportedCompression";
    case ErrorCode::BadDexMagic:
        return "BadDexMagic";
    case ErrorCode::HeaderOutOfBounds:
        return "HeaderOutOfBounds";
    case ErrorCode::InvalidMagic:
        return "InvalidMagic";
    case ErrorCode::InvalidVersion:
        return "InvalidVersion";
    case ErrorCode::TruncatedSection:
        return "TruncatedSection";
    case ErrorCode::LebOverflow:
        return "LebOverflow";
    case ErrorCode::UnexpectedEof:
        return "UnexpectedEof";
    case ErrorCode::NotAFunctionExport:
        return "NotAFunctionExport";
    case ErrorCode::IndexOutOfRange:
        return "IndexOutOfRange";
    case ErrorCode::CatalogError:
        return "CatalogError";
    case ErrorCode::IoError:
        return "IoError";
    }
    return "Unknown";
}
}  // namespace wasmdroid
