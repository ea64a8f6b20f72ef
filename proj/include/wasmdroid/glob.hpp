// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

namespace wasmdroid
{
/// Shell-style match supporting `*`, `?` and `**`. When `path_mode` is set,
/// `*` and `?` stop at '/', `**` crosses directories and `**/` may match
/// nothing. Otherwise `*` matches any run of characters.
bool glob_match(std::string_view pattern, std::string_view text, bool path_mode = false);
}  // namespace wasmdroid
