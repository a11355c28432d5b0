// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace orchestra
{

/// Canonical form used for voting and exact-match scoring.
///
/// The answer is split on `|` and each part is normalized independently
/// (order preserved): whitespace is trimmed and collapsed, ASCII letters are
/// lowercased, then a trailing `.`/`!` and paired surrounding quotes are
/// stripped until neither applies. A part that is a decimal number once
/// thousands separators (groups of three digits) and a trailing `%` are
/// removed is rewritten canonically: no leading zeros, no trailing
/// fractional zeros, integral values without a decimal point, no `-0`.
///
/// The result is a fixed point: normalize_answer(normalize_answer(x)) equals
/// normalize_answer(x) for every input.
std::string normalize_answer(std::string_view raw);

/// True iff the normalized prediction equals some normalized gold answer.
/// Multi-part answers therefore compare part by part, in order.
bool evaluate_exact_match(std::string_view prediction, const std::vector<std::string>& gold_answers);

} // namespace orchestra
