// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/table.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace orchestra
{

inline constexpr std::string_view kShortAnswerHint =
    "Answer concisely with the exact entity, number or short phrase from the table. "
    "If there are several answers, separate them with |.";

inline constexpr std::string_view kYesNoAnswerHint =
    "The question is a statement about the table. Answer either \"yes\" or \"no\".";

/// One table question answering problem.
struct TQATask
{
    std::string id;
    Table table;
    std::string question;
    std::vector<std::string> gold_answers;
    std::string answer_format_hint {kShortAnswerHint};
    /// Exemplar family used for few-shot prompts (`wikitq`, `tabfact`, ...).
    std::string family = "wikitq";
};

/// Answer-format constraint conventionally used for a benchmark family.
std::string_view default_answer_hint(std::string_view family);

} // namespace orchestra
