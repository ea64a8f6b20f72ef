// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "scan.hpp"
#include <string>

namespace wasmdroid
{
/// Markdown reference for the loaded tables: indicator catalog grouped by
/// detection point, capability rules, IoC patterns, weights and thresholds.
/// Throws CatalogError if a detection point has no catalog entry.
std::string generate_catalog_reference(const Catalogs& catalogs);
}  // namespace wasmdroid
