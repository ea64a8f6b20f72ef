// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace wasmdroid::detail
{
struct TsvLine
{
    size_t number = 0;  ///< 1-based
    std::vector<std::string_view> fields;
};

/// Tab-separated rows with blank lines and `#` comments dropped. A trailing
/// '\r' is stripped so files edited on Windows still load.
inline std::vector<TsvLine> read_tsv(std::string_view text)
{
    std::vector<TsvLine> out;
    size_t number = 0;
    while (!text.empty())
    {
        ++number;
        const auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos || line.front() == '#')
            continue;
        TsvLine row{number, {}};
        while (true)
        {
            const auto tab = line.find('\t');
            row.fields.push_back(line.substr(0, tab));
            if (tab == std::string_view::npos)
                break;
            line = line.substr(tab + 1);
        }
        out.push_back(std::move(row));
    }
    return out;
}
}  // namespace wasmdroid::detail
