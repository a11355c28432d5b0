// SPDX-License-Identifier: Apache-2.0
#include <orchestra/normalize.hpp>
#include <orchestra/task.hpp>

#include "text_util.hpp"

#include <array>
#include <optional>
#include <utility>

namespace orchestra
{

std::string_view default_answer_hint(std::string_view family)
{
    return family == "tabfact" ? kYesNoAnswerHint : kShortAnswerHint;
}

namespace
{

bool is_digit(char c)
{
    return c >= '0' && c <= '9';
}

bool all_digits(std::string_view s)
{
    return std::all_of(s.begin(), s.end(), is_digit);
}

// Integer part with optional thousands separators in strict groups of three.
std::optional<std::string> strip_grouping(std::string_view integer)
{
    if (integer.find(',') == std::string_view::npos)
        return all_digits(integer) ? std::optional<std::string>(integer) : std::nullopt;
    auto groups = text::split(integer, ',');
    if (groups.front().empty() || groups.front().size() > 3 || !all_digits(groups.front()))
        return std::nullopt;
    auto out = std::string(groups.front());
    for (std::size_t i = 1; i < groups.size(); ++i)
    {
        if (groups[i].size() != 3 || !all_digits(groups[i]))
            return std::nullopt;
        out += groups[i];
    }
    return out;
}

std::optional<std::string> canonical_number(std::string_view s)
{
    if (s.ends_with('%'))
        s.remove_suffix(1);
    bool negative = false;
    if (s.starts_with('-') || s.starts_with('+'))
    {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    auto dot = s.find('.');
    auto integer_text = s.substr(0, dot);
    auto fraction = dot == std::string_view::npos ? std::string_view {} : s.substr(dot + 1);
    if (integer_text.empty() && fraction.empty())
        return std::nullopt;
    if (!all_digits(fraction))
        return std::nullopt;

    auto integer = strip_grouping(integer_text);
    if (!integer)
        return std::nullopt;

    auto first_nonzero = integer->find_first_not_of('0');
    auto whole = first_nonzero == std::string::npos ? std::string("0") : integer->substr(first_nonzero);
    auto last_nonzero = fraction.find_last_not_of('0');
    auto frac = last_nonzero == std::string_view::npos ? std::string_view {} : fraction.substr(0, last_nonzero + 1);

    auto out = std::string {};
    if (negative && !(whole == "0" && frac.empty()))
        out += '-';
    out += whole;
    if (!frac.empty())
    {
        out += '.';
        out += frac;
    }
    return out;
}

constexpr auto kQuotePairs = std::array<std::pair<std::string_view, std::string_view>, 4> {{
    {"\"", "\""},
    {"'", "'"},
    {"\xE2\x80\x9C", "\xE2\x80\x9D"}, // curly double quotes
    {"\xE2\x80\x98", "\xE2\x80\x99"}, // curly single quotes
}};

std::string normalize_part(std::string_view raw)
{
    auto s = text::collapse_whitespace(text::to_lower(raw));
    for (bool changed = true; changed;)
    {
        changed = false;
        if (s.ends_with('.') || s.ends_with('!'))
        {
            s.pop_back();
            s = text::collapse_whitespace(s);
            changed = true;
        }
        for (const auto& [open, close]: kQuotePairs)
        {
            if (s.size() >= open.size() + close.size() && s.starts_with(open) && s.ends_with(close))
            {
                s = text::collapse_whitespace(std::string_view(s).substr(open.size(), s.size() - open.size() - close.size()));
                changed = true;
                break;
            }
        }
    }
    if (auto number = canonical_number(s))
        return *number;
    return s;
}

} // namespace

std::string normalize_answer(std::string_view raw)
{
    auto parts = std::vector<std::string> {};
    for (auto part: text::split(raw, '|'))
        parts.push_back(normalize_part(part));
    return text::join(parts, "|");
}

bool evaluate_exact_match(std::string_view prediction, const std::vector<std::string>& gold_answers)
{
    auto predicted = normalize_answer(prediction);
    return std::any_of(gold_answers.begin(), gold_answers.end(),
                       [&](const std::string& gold) { return normalize_answer(gold) == predicted; });
}

} // namespace orchestra
