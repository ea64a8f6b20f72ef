// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "emit.hpp"
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid::testkit
{
/// A fixture described by a JSON manifest (see fixtures/README.md).
struct Fixture
{
    std::string name;
    std::string kind;  ///< "apk" or "wasm"
    Bytes bytes;
    std::map<std::string, ModuleSpec> modules;
    /// Where each embedded module landed: (entry path, offset, module name).
    struct Placement
    {
        std::string path;
        uint64_t offset = 0;
        std::string module;
    };
    std::vector<Placement> placements;
};

/// Throws CatalogError for malformed manifests.
Fixture build_fixture(std::string_view manifest_json);
Fixture load_fixture(const std::filesystem::path& manifest);

/// ModuleSpec from its JSON form.
ModuleSpec module_spec_from_json(std::string_view json);
}  // namespace wasmdroid::testkit
