// SPDX-License-Identifier: Apache-2.0
#include <orchestra/agents.hpp>
#include <orchestra/error.hpp>

#include "text_util.hpp"

#include <algorithm>
#include <array>

namespace orchestra
{

std::string_view to_string(AgentRole role)
{
    switch (role)
    {
        case AgentRole::logic: return "logic";
        case AgentRole::query: return "query";
        case AgentRole::decision: return "decision";
    }
    return "logic";
}

std::string_view to_string(ToolProgram::Kind kind)
{
    return kind == ToolProgram::Kind::sql ? "sql" : "script";
}

bool is_single_select(std::string_view code)
{
    code = text::trim(code);
    if (!text::iequals_prefix(code, "select"))
        return false;
    if (code.size() > 6)
    {
        auto next = static_cast<unsigned char>(code[6]);
        if (std::isalnum(next) || next == '_')
            return false;
    }

    char quote = 0;
    for (std::size_t i = 0; i < code.size(); ++i)
    {
        char c = code[i];
        if (quote != 0)
        {
            if (c == quote)
                quote = 0;
            continue;
        }
        if (c == '\'' || c == '"' || c == '`')
            quote = c;
        else if (c == '-' && i + 1 < code.size() && code[i + 1] == '-')
        {
            auto eol = code.find('\n', i);
            if (eol == std::string_view::npos)
                break;
            i = eol;
        }
        else if (c == ';')
        {
            auto rest = code.substr(i + 1);
            return rest.find_first_not_of(" \t\r\n;") == std::string_view::npos;
        }
    }
    return true;
}

ToolProgram::ToolProgram(Kind kind, std::string code): _kind(kind), _code(text::trim(code))
{
    if (_code.empty())
        throw ParseError("program code is empty");
    if (_kind == Kind::sql && !is_single_select(_code))
        throw ParseError("SQL program must be a single SELECT statement");
}

AgentMemory::AgentMemory(AgentRole role, std::string question, Table initial_table): _role(role)
{
    _entries.push_back(MemoryEntry {
        .kind = EntryKind::question,
        .text = std::move(question),
        .table = std::move(initial_table),
    });
}

void AgentMemory::append(MemoryEntry entry)
{
    if (_role != AgentRole::query && (entry.kind == EntryKind::program || entry.program.has_value()))
        throw ContractViolation(std::string("program code may not enter the ") + std::string(to_string(_role))
                                + " agent's memory");
    if (entry.kind == EntryKind::question)
        throw ContractViolation("a memory holds exactly one question entry");
    _entries.push_back(std::move(entry));
}

void update_memory(AgentMemory& memory, const RoundArtifacts& artifacts)
{
    switch (memory.role())
    {
        case AgentRole::logic:
            if (artifacts.program)
                throw ContractViolation("program code may not enter the logic agent's memory");
            if (artifacts.reasoning.empty())
                throw ContractViolation("logic round artifacts need a reasoning statement");
            memory.append({.kind = EntryKind::reasoning, .text = artifacts.reasoning});
            memory.append({.kind = EntryKind::instruction, .text = artifacts.instruction});
            memory.append({.kind = EntryKind::table_obs, .table = artifacts.observation});
            break;
        case AgentRole::query:
            memory.append({.kind = EntryKind::instruction, .text = artifacts.instruction});
            if (artifacts.program)
                memory.append({.kind = EntryKind::program, .program = artifacts.program});
            memory.append({.kind = EntryKind::table_obs, .table = artifacts.observation});
            break;
        case AgentRole::decision: throw ContractViolation("the decision agent has no round memory");
    }
}

namespace
{

enum class Marker
{
    none,
    reasoning,
    instruction,
    answer,
    observation,
};

struct MarkerHit
{
    Marker marker = Marker::none;
    std::string_view rest;
};

// Recognizes `NAME:` at a line start, tolerating markdown decoration such
// as `**Answer:**` or `### Reasoning:`.
MarkerHit match_marker(std::string_view line)
{
    std::size_t i = 0;
    while (i < line.size() && (line[i] == '*' || line[i] == '#' || line[i] == '>' || text::is_space(line[i])))
        ++i;
    std::size_t name_start = i;
    while (i < line.size() && (std::isalpha(static_cast<unsigned char>(line[i])) || line[i] == ' ' || line[i] == '_'))
        ++i;
    auto name = text::to_lower(text::trim(line.substr(name_start, i - name_start)));
    while (i < line.size() && line[i] == '*')
        ++i;
    if (i >= line.size() || line[i] != ':')
        return {};
    ++i;
    while (i < line.size() && line[i] == '*')
        ++i;

    auto rest = line.substr(i);
    if (name == "reasoning")
        return {Marker::reasoning, rest};
    if (name == "instruction")
        return {Marker::instruction, rest};
    if (name == "answer" || name == "final answer")
        return {Marker::answer, rest};
    if (name == "observation")
        return {Marker::observation, rest};
    return {};
}

struct Section
{
    Marker marker;
    std::string text;
};

std::vector<Section> split_sections(std::string_view raw)
{
    auto sections = std::vector<Section> {};
    for (auto line: text::split_lines(raw))
    {
        auto hit = match_marker(line);
        if (hit.marker != Marker::none)
        {
            sections.push_back({hit.marker, std::string(hit.rest)});
            continue;
        }
        if (!sections.empty())
        {
            sections.back().text += '\n';
            sections.back().text += line;
        }
    }
    for (auto& section: sections)
        section.text = std::string(text::trim(section.text));
    return sections;
}

std::string first_section(const std::vector<Section>& sections, Marker marker)
{
    for (const auto& section: sections)
        if (section.marker == marker && !section.text.empty())
            return section.text;
    return {};
}

} // namespace

LogicOutput parse_logic_output(std::string_view raw)
{
    auto sections = split_sections(raw);
    for (auto it = sections.rbegin(); it != sections.rend(); ++it)
        if (it->marker == Marker::answer && !it->text.empty())
            return LogicAnswer {it->text};

    auto reasoning = first_section(sections, Marker::reasoning);
    auto instruction = first_section(sections, Marker::instruction);
    if (reasoning.empty() || instruction.empty())
        throw ParseError("logic output lacks ANSWER or REASONING+INSTRUCTION markers");
    return LogicContinue {std::move(reasoning), std::move(instruction)};
}

std::string render_logic_output(const LogicOutput& output)
{
    if (const auto* answer = std::get_if<LogicAnswer>(&output))
        return "ANSWER: " + answer->text;
    const auto& step = std::get<LogicContinue>(output);
    return "REASONING: " + step.reasoning + "\nINSTRUCTION: " + step.instruction;
}

namespace
{

enum class FenceLanguage
{
    sql,
    script,
    unlabeled,
    other,
};

FenceLanguage classify_label(std::string_view label)
{
    auto lowered = text::to_lower(label);
    if (lowered.empty())
        return FenceLanguage::unlabeled;
    static constexpr auto sql_labels = std::array<std::string_view, 4> {"sql", "sqlite", "mysql", "postgresql"};
    static constexpr auto script_labels = std::array<std::string_view, 5> {"python", "py", "python3", "pandas",
                                                                            "script"};
    if (std::find(sql_labels.begin(), sql_labels.end(), lowered) != sql_labels.end())
        return FenceLanguage::sql;
    if (std::find(script_labels.begin(), script_labels.end(), lowered) != script_labels.end())
        return FenceLanguage::script;
    return FenceLanguage::other;
}

bool is_language_word(std::string_view label)
{
    return !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '+' || c == '-';
    });
}

// Looks at the current line up to the fence and the previous non-empty line
// for a `SQL:` / `Python:` prefix.
std::optional<ToolProgram::Kind> prefix_kind(std::string_view raw, std::size_t fence_pos)
{
    auto head = raw.substr(0, fence_pos);
    auto line_start = head.rfind('\n');
    auto context = std::string(head.substr(line_start == std::string_view::npos ? 0 : line_start + 1));
    if (text::trim(context).empty() && line_start != std::string_view::npos)
    {
        auto before = text::trim(head.substr(0, line_start));
        auto prev = before.rfind('\n');
        context = std::string(before.substr(prev == std::string_view::npos ? 0 : prev + 1));
    }
    auto lowered = text::to_lower(context);
    if (lowered.find("sql:") != std::string::npos)
        return ToolProgram::Kind::sql;
    if (lowered.find("python:") != std::string::npos)
        return ToolProgram::Kind::script;
    return std::nullopt;
}

std::optional<ToolProgram> scan_fences(std::string_view raw)
{
    std::size_t pos = 0;
    while ((pos = raw.find("```", pos)) != std::string_view::npos)
    {
        auto fence_pos = pos;
        auto after = pos + 3;
        auto eol = raw.find('\n', after);
        auto label = text::trim(raw.substr(after, eol == std::string_view::npos ? std::string_view::npos : eol - after));

        std::size_t content_start = after;
        auto language = FenceLanguage::unlabeled;
        if (label.empty() || is_language_word(label))
        {
            language = classify_label(label);
            content_start = eol == std::string_view::npos ? raw.size() : eol + 1;
        }
        if (language == FenceLanguage::unlabeled && !label.empty() && !is_language_word(label))
            content_start = after;

        auto close = raw.find("```", content_start);
        auto code = raw.substr(content_start, close == std::string_view::npos ? std::string_view::npos
                                                                               : close - content_start);
        pos = close == std::string_view::npos ? raw.size() : close + 3;

        if (language == FenceLanguage::other || text::trim(code).empty())
            continue;

        auto kind = ToolProgram::Kind::script;
        if (language == FenceLanguage::sql)
            kind = ToolProgram::Kind::sql;
        else if (language == FenceLanguage::unlabeled)
        {
            if (auto hinted = prefix_kind(raw, fence_pos))
                kind = *hinted;
            else if (text::iequals_prefix(text::trim(code), "select"))
                kind = ToolProgram::Kind::sql;
        }
        return ToolProgram(kind, std::string(code));
    }
    return std::nullopt;
}

std::optional<ToolProgram> scan_prefixed_lines(std::string_view raw)
{
    auto lines = text::split_lines(raw);
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
        auto line = text::trim(lines[i]);
        auto kind = ToolProgram::Kind::sql;
        std::size_t prefix_len = 0;
        if (text::iequals_prefix(line, "sql:"))
            prefix_len = 4;
        else if (text::iequals_prefix(line, "python:"))
        {
            kind = ToolProgram::Kind::script;
            prefix_len = 7;
        }
        else
            continue;

        auto code = std::string(text::trim(line.substr(prefix_len)));
        for (std::size_t j = i + 1; j < lines.size(); ++j)
        {
            auto next = text::trim(lines[j]);
            if (next.empty() || text::iequals_prefix(next, "sql:") || text::iequals_prefix(next, "python:"))
                break;
            if (!code.empty())
                code += '\n';
            code += lines[j];
        }
        if (!text::trim(code).empty())
            return ToolProgram(kind, std::move(code));
    }
    return std::nullopt;
}

} // namespace

ToolProgram parse_tool_program(std::string_view raw)
{
    if (auto fenced = scan_fences(raw))
        return *fenced;
    if (auto prefixed = scan_prefixed_lines(raw))
        return *prefixed;
    throw ParseError("no SQL or script program found in query agent output");
}

std::string parse_decision_output(std::string_view raw)
{
    auto lowered = text::to_lower(raw);
    auto marker = lowered.rfind("answer:");
    if (marker != std::string::npos)
    {
        auto rest = raw.substr(marker + 7);
        auto stripped = rest.find_first_not_of("* \t\r\n");
        if (stripped != std::string_view::npos)
        {
            rest = rest.substr(stripped);
            auto eol = rest.find('\n');
            auto answer = text::trim(rest.substr(0, eol));
            while (answer.ends_with('*'))
                answer.remove_suffix(1);
            answer = text::trim(answer);
            if (!answer.empty())
                return std::string(answer);
        }
    }

    auto lines = text::split_lines(raw);
    for (auto it = lines.rbegin(); it != lines.rend(); ++it)
    {
        auto line = text::trim(*it);
        if (!line.empty() && !text::iequals_prefix(line, "answer:"))
            return std::string(line);
    }
    throw EmptyAnswerError();
}

void validate_exemplar(const FewShotExemplar& exemplar)
{
    if (exemplar.turns.empty())
        throw FormatError("exemplar " + exemplar.sentinel + " has no turns");
    for (std::size_t i = 0; i < exemplar.turns.size(); ++i)
    {
        auto expected = i % 2 == 0 ? Role::user : Role::assistant;
        if (exemplar.turns[i].role != expected)
            throw FormatError("exemplar " + exemplar.sentinel + " turns must alternate user/assistant");
        if (text::trim(exemplar.turns[i].content).empty())
            throw FormatError("exemplar " + exemplar.sentinel + " has an empty turn");
    }
    if (exemplar.turns.back().role != Role::assistant)
        throw FormatError("exemplar " + exemplar.sentinel + " must end with an assistant turn");
}

const std::string_view kLogicFormatReminder =
    "Your previous reply did not follow the required format. Reply with either\n"
    "REASONING: <reasoning>\nINSTRUCTION: <instruction for the query agent>\n"
    "or\nANSWER: <final answer>";

const std::string_view kQueryFormatReminder =
    "Your previous reply did not contain a program. Reply with exactly one program, either\n"
    "SQL:\n```sql\nSELECT ... FROM DF ...\n```\nor\nPython:\n```python\n...\n```";

namespace
{

constexpr std::string_view kLogicRoleCard =
    "You are the logic agent of a table question answering team. You reason about a question over a table "
    "and decide which evidence is still missing. You never write code: a query agent carries out your "
    "instructions on the table and shows you the resulting table as an OBSERVATION.\n"
    "\n"
    "Reply in exactly one of two forms.\n"
    "To request evidence:\n"
    "REASONING: <what the observations establish so far and what is still needed>\n"
    "INSTRUCTION: <one concrete data operation for the query agent, naming the columns and values involved>\n"
    "When the observations are sufficient:\n"
    "ANSWER: <final answer>";

constexpr std::string_view kQueryRoleCard =
    "You are the query agent of a table question answering team. You translate one instruction into one "
    "program over the current table, registered as DF. Keep every column the instruction needs.\n"
    "\n"
    "Write either an SQLite query:\n"
    "SQL:\n"
    "```sql\n"
    "SELECT ... FROM DF ...\n"
    "```\n"
    "(a single SELECT statement; use CAST(column AS REAL) to compare text as numbers), or a Python script:\n"
    "Python:\n"
    "```python\n"
    "...\n"
    "```\n"
    "where the table is a pandas DataFrame bound to both `df` and `DF`. Assign the output to `result`, or "
    "leave the transformed table in `df`. Reply with the program only.";

constexpr std::string_view kDecisionRoleCard =
    "You answer a question about a table. Base the answer only on the table and on the reasoning steps "
    "below, which were gathered while investigating the question. Think briefly, then finish with a line "
    "of the form\n"
    "ANSWER: <answer>";

std::string with_hint(std::string_view card, std::string_view hint)
{
    auto out = std::string(card);
    if (!text::trim(hint).empty())
    {
        out += "\n\n";
        out += hint;
    }
    return out;
}

void append_exemplars(std::vector<ChatMessage>& messages, std::span<const FewShotExemplar> exemplars)
{
    for (const auto& exemplar: exemplars)
        messages.insert(messages.end(), exemplar.turns.begin(), exemplar.turns.end());
}

std::string fence_label(ToolProgram::Kind kind)
{
    return kind == ToolProgram::Kind::sql ? "sql" : "python";
}

} // namespace

std::string serialize_logic_memory(const AgentMemory& memory, const RenderOptions& render)
{
    auto out = std::string {};
    for (const auto& entry: memory.entries())
    {
        switch (entry.kind)
        {
            case EntryKind::question:
                out += "QUESTION: " + entry.text + "\n\nTABLE:\n" + render_markdown(*entry.table, render) + "\n";
                break;
            case EntryKind::reasoning: out += "\nREASONING: " + entry.text + "\n"; break;
            case EntryKind::instruction: out += "INSTRUCTION: " + entry.text + "\n"; break;
            case EntryKind::table_obs:
                out += "OBSERVATION:\n" + render_markdown(*entry.table, render) + "\n";
                break;
            case EntryKind::note: out += entry.text + "\n"; break;
            case EntryKind::program: break;
        }
    }
    return out;
}

std::vector<ChatMessage> build_logic_prompt(std::span<const FewShotExemplar> exemplars, const AgentMemory& memory,
                                            const PromptOptions& options)
{
    if (memory.role() != AgentRole::logic)
        throw ContractViolation("build_logic_prompt needs the logic agent's memory");
    auto messages = std::vector<ChatMessage> {ChatMessage::system(with_hint(kLogicRoleCard,
                                                                            options.answer_format_hint))};
    append_exemplars(messages, exemplars);
    messages.push_back(ChatMessage::user(serialize_logic_memory(memory, options.render)));
    return messages;
}

std::vector<ChatMessage> build_query_prompt(std::span<const FewShotExemplar> exemplars, const AgentMemory& memory,
                                            std::string_view instruction, const Table& working_table,
                                            const RenderOptions& render)
{
    if (memory.role() != AgentRole::query)
        throw ContractViolation("build_query_prompt needs the query agent's memory");
    if (text::trim(instruction).empty())
        throw ContractViolation("query instruction is empty");

    auto body = std::string {};
    bool has_history = memory.entries().size() > 1;
    if (has_history)
        body += "PREVIOUS STEPS:\n";
    for (std::size_t i = 1; i < memory.entries().size(); ++i)
    {
        const auto& entry = memory.entries()[i];
        switch (entry.kind)
        {
            case EntryKind::instruction: body += "\nINSTRUCTION: " + entry.text + "\n"; break;
            case EntryKind::program:
                body += "PROGRAM:\n```" + fence_label(entry.program->kind()) + "\n" + entry.program->code()
                        + "\n```\n";
                break;
            case EntryKind::table_obs:
                body += "OBSERVATION:\n" + render_markdown(*entry.table, render) + "\n";
                break;
            case EntryKind::note: body += entry.text + "\n"; break;
            case EntryKind::question:
            case EntryKind::reasoning: break;
        }
    }
    if (has_history)
        body += "\n";
    body += std::string("TABLE ") + std::string(kRegisteredTableName) + " (columns: " + describe_schema(working_table)
            + "):\n" + render_markdown(working_table, render) + "\n\nINSTRUCTION: " + std::string(instruction);

    auto messages = std::vector<ChatMessage> {ChatMessage::system(std::string(kQueryRoleCard))};
    append_exemplars(messages, exemplars);
    messages.push_back(ChatMessage::user(std::move(body)));
    return messages;
}

std::vector<ChatMessage> build_decision_prompt(const RefinedContext& context, const PromptOptions& options)
{
    auto body = "QUESTION: " + context.question + "\n\nTABLE:\n" + render_markdown(context.initial_table,
                                                                                    options.render)
                + "\n";
    for (std::size_t i = 0; i < context.steps.size(); ++i)
    {
        const auto& step = context.steps[i];
        body += "\nSTEP " + std::to_string(i + 1) + "\nREASONING: " + step.reasoning + "\nINSTRUCTION: "
                + step.instruction + "\nOBSERVATION:\n" + render_markdown(step.observation, options.render) + "\n";
    }
    return {
        ChatMessage::system(with_hint(kDecisionRoleCard, options.answer_format_hint)),
        ChatMessage::user(std::move(body)),
    };
}

} // namespace orchestra
