// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

// Shipped tables, compiled in from data/*.tsv.
namespace wasmdroid::builtin_data
{
std::string_view indicators_tsv() noexcept;
std::string_view capabilities_tsv() noexcept;
std::string_view ioc_patterns_tsv() noexcept;
std::string_view weights_tsv() noexcept;
}  // namespace wasmdroid::builtin_data
