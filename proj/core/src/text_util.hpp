// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace orchestra::text
{

inline bool is_space(char c)
{
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return s;
}

inline std::string to_lower(std::string_view s)
{
    auto out = std::string(s);
    for (auto& c: out)
        if (static_cast<unsigned char>(c) < 0x80)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline bool iequals_prefix(std::string_view s, std::string_view prefix)
{
    if (s.size() < prefix.size())
        return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    return true;
}

inline std::vector<std::string_view> split(std::string_view s, char sep)
{
    auto parts = std::vector<std::string_view> {};
    std::size_t start = 0;
    while (true)
    {
        auto pos = s.find(sep, start);
        if (pos == std::string_view::npos)
        {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

/// Splits on LF, dropping a CR that precedes it. A trailing newline does not
/// produce an extra empty line.
inline std::vector<std::string_view> split_lines(std::string_view s)
{
    auto lines = split(s, '\n');
    for (auto& line: lines)
        if (line.ends_with('\r'))
            line.remove_suffix(1);
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();
    return lines;
}

inline std::string collapse_whitespace(std::string_view s)
{
    auto out = std::string {};
    bool pending_space = false;
    for (char c: trim(s))
    {
        if (is_space(c))
        {
            pending_space = true;
            continue;
        }
        if (pending_space)
            out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    auto out = std::string {};
    for (std::size_t i = 0; i < parts.size(); ++i)
    {
        if (i > 0)
            out += sep;
        out += parts[i];
    }
    return out;
}

/// Number of UTF-8 code points (continuation bytes are not counted).
inline std::size_t utf8_length(std::string_view s)
{
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

} // namespace orchestra::text
