// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/llm.hpp>
#include <orchestra/table.hpp>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace orchestra
{

enum class AgentRole
{
    logic,
    query,
    decision,
};

std::string_view to_string(AgentRole role);

/// Code produced by the query agent.
class ToolProgram
{
  public:
    enum class Kind
    {
        sql,
        script,
    };

    /// Throws ParseError when `code` is blank, or when an SQL program is not a
    /// single statement starting with SELECT.
    ToolProgram(Kind kind, std::string code);

    [[nodiscard]] Kind kind() const noexcept { return _kind; }
    [[nodiscard]] const std::string& code() const noexcept { return _code; }

    friend bool operator==(const ToolProgram&, const ToolProgram&) = default;

  private:
    Kind _kind;
    std::string _code;
};

std::string_view to_string(ToolProgram::Kind kind);

/// True when `code` holds one statement (a trailing `;` is allowed) whose
/// first keyword is SELECT.
bool is_single_select(std::string_view code);

enum class EntryKind
{
    question,
    table_obs,
    reasoning,
    instruction,
    program,
    note,
};

struct MemoryEntry
{
    EntryKind kind = EntryKind::note;
    std::string text;
    std::optional<Table> table;
    std::optional<ToolProgram> program;
};

/// Append-only conversation state of one agent within one episode. The first
/// entry is always the question together with the initial table.
class AgentMemory
{
  public:
    AgentMemory(AgentRole role, std::string question, Table initial_table);

    /// Throws ContractViolation when a program entry is pushed into a logic
    /// or decision memory.
    void append(MemoryEntry entry);

    [[nodiscard]] AgentRole role() const noexcept { return _role; }
    [[nodiscard]] const std::vector<MemoryEntry>& entries() const noexcept { return _entries; }
    [[nodiscard]] const std::string& question() const { return _entries.front().text; }
    [[nodiscard]] const Table& initial_table() const { return *_entries.front().table; }

  private:
    AgentRole _role;
    std::vector<MemoryEntry> _entries;
};

/// What one round produced. Logic memories take (reasoning, instruction,
/// observation); query memories take (instruction, program, observation).
struct RoundArtifacts
{
    std::string reasoning;
    std::string instruction;
    std::optional<ToolProgram> program;
    Table observation;
};

/// Appends the role's share of `artifacts` in order. For a logic memory a
/// present program is a ContractViolation; reasoning must be non-empty.
void update_memory(AgentMemory& memory, const RoundArtifacts& artifacts);

struct LogicContinue
{
    std::string reasoning;
    std::string instruction;

    friend bool operator==(const LogicContinue&, const LogicContinue&) = default;
};

struct LogicAnswer
{
    std::string text;

    friend bool operator==(const LogicAnswer&, const LogicAnswer&) = default;
};

using LogicOutput = std::variant<LogicContinue, LogicAnswer>;

/// Line-start markers `ANSWER:`, `REASONING:`, `INSTRUCTION:` (any case).
/// A non-empty ANSWER wins; otherwise both REASONING and INSTRUCTION must be
/// present and non-empty. Marker text runs to the next marker or the end.
LogicOutput parse_logic_output(std::string_view raw);

/// Tagged transcript form that parse_logic_output accepts.
std::string render_logic_output(const LogicOutput& output);

/// First ```sql / ```python fence, else an unlabeled fence (kind from a
/// preceding `SQL:` / `Python:` prefix or from the code itself), else
/// `SQL:` / `Python:` prefixed lines. Throws ParseError when nothing usable
/// is found.
ToolProgram parse_tool_program(std::string_view raw);

/// Text after the last `ANSWER:` marker (first line), else the last
/// non-empty line. Throws EmptyAnswerError on blank output.
std::string parse_decision_output(std::string_view raw);

/// A few-shot transcript. Turns alternate user/assistant and end with an
/// assistant turn; the sentinel is embedded in the first user turn so that
/// leakage into other prompts can be detected by substring search.
struct FewShotExemplar
{
    AgentRole role = AgentRole::logic;
    std::string sentinel;
    std::vector<ChatMessage> turns;
};

/// Throws FormatError when the turn structure is invalid.
void validate_exemplar(const FewShotExemplar& exemplar);

/// Verbatim follow-up sent when the round cap is reached.
inline constexpr std::string_view kForcedAnswerPrompt = "Please provide an answer directly";

extern const std::string_view kLogicFormatReminder;
extern const std::string_view kQueryFormatReminder;

/// Name under which the working table is registered for every tool.
inline constexpr std::string_view kRegisteredTableName = "DF";

struct PromptOptions
{
    std::string answer_format_hint;
    RenderOptions render;
};

/// Serialized memory in prompt order: question, initial table, then one
/// REASONING / INSTRUCTION / OBSERVATION block per round.
std::string serialize_logic_memory(const AgentMemory& memory, const RenderOptions& render);

/// System role card, exemplar turns, then the serialized memory as a single
/// user message. Program code never appears.
std::vector<ChatMessage> build_logic_prompt(std::span<const FewShotExemplar> exemplars, const AgentMemory& memory,
                                            const PromptOptions& options);

/// System role card, exemplar turns, and one user message with the prior
/// (instruction, program, observation) history, the current table and the
/// new instruction.
std::vector<ChatMessage> build_query_prompt(std::span<const FewShotExemplar> exemplars, const AgentMemory& memory,
                                            std::string_view instruction, const Table& working_table,
                                            const RenderOptions& render);

struct ReasoningStep
{
    std::string reasoning;
    std::string instruction;
    Table observation;
};

/// What the decision agent is allowed to see.
struct RefinedContext
{
    std::string question;
    Table initial_table;
    std::vector<ReasoningStep> steps;
};

/// Exemplar-free prompt: role card with the answer-format constraint, then
/// the question, the initial table and the ordered reasoning steps.
std::vector<ChatMessage> build_decision_prompt(const RefinedContext& context, const PromptOptions& options);

} // namespace orchestra
