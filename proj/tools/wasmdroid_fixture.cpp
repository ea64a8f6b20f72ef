// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

// Builds fixture binaries from JSON manifests.
// usage: wasmdroid-fixture <manifest.json> <output>

#include <wasmdroid/testkit/manifest.hpp>
#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
    if (argc != 3)
    {
        std::cerr << "usage: wasmdroid-fixture <manifest.json> <output>\n";
        return 2;
    }
    try
    {
        const auto fx = wasmdroid::testkit::load_fixture(argv[1]);
        std::ofstream out{argv[2], std::ios::binary | std::ios::trunc};
        out.write(reinterpret_cast<const char*>(fx.bytes.data()), static_cast<std::streamsize>(fx.bytes.size()));
        return out ? 0 : 1;
    }
    catch (const std::exception& e)
    {
        std::cerr << "wasmdroid-fixture: " << e.what() << "\n";
        return 1;
    }
}
