// wasmdroid: static detection of WebAssembly payloads in Android packages
// SPDX-License-Identifier: Apache-2.0

#include <wasmdroid/glob.hpp>

namespace wasmdroid
{
namespace
{
bool match(std::string_view p, std::string_view t, bool path_mode)
{
    while (!p.empty())
    {
        if (path_mode && p.substr(0, 2) == "**")
        {
            auto rest = p.substr(2);
            // "**/" also matches zero directories
            if (!rest.empty() && rest.front() == '/' && match(rest.substr(1), t, path_mode))
                return true;
            for (size_t i = 0; i <= t.size(); ++i)
            {
                if (match(rest, t.substr(i), path_mode))
                    return true;
            }
            return false;
        }
        const char c = p.front();
        if (c == '*')
        {
            const auto rest = p.substr(1);
            for (size_t i = 0; i <= t.size(); ++i)
            {
                if (match(rest, t.substr(i), path_mode))
                    return true;
                if (i < t.size() && path_mode && t[i] == '/')
                    return false;
            }
            return false;
        }
        if (t.empty())
            return false;
        if (c == '?')
        {
            if (path_mode && t.front() == '/')
                return false;
        }
        else if (c != t.front())
            return false;
        p.remove_prefix(1);
        t.remove_prefix(1);
    }
    return t.empty();
}
}  // namespace

bool glob_match(std::string_view pattern, std::string_view text, bool path_mode)
{
    return match(pattern, text, path_mode);
}
}  // namespace wasmdroid
