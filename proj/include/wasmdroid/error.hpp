// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wasmdroid
{
enum class ErrorCode
{
    NotAZip,
    TruncatedArchive,
    NoSuchEntry,
    UnsupportedCompression,
    BadDexMagic,
    HeaderOutOfBounds,
    InvalidMagic,
    InvalidVersion,
    TruncatedSection,
    LebOverflow,
    UnexpectedEof,
    NotAFunctionExport,
    IndexOutOfRange,
    CatalogError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure the library reports is an Error carrying a machine-checkable code.
class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message)
      : std::runtime_error{std::string{to_string(code)} + ": " + message}, m_code{code}
    {}

    ErrorCode code() const noexcept { return m_code; }

private:
    ErrorCode m_code;
};
}  // namespace wasmdroid
