// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/agents.hpp>
#include <orchestra/table.hpp>

#include <chrono>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace orchestra
{

struct TableResult
{
    Table table;
};

struct ScalarResult
{
    std::string text;
};

struct Failure
{
    std::string message;
};

using ToolResult = std::variant<TableResult, ScalarResult, Failure>;

/// Command used when no sandbox is configured; resolved through PATH.
inline constexpr std::string_view kDefaultSandboxCommand = "orchestra-sandbox";

/// Static tool configuration shared by every episode of a run.
struct ToolSettings
{
    /// argv of the script sandbox runner.
    std::vector<std::string> sandbox_command {std::string(kDefaultSandboxCommand)};
    std::chrono::milliseconds sandbox_timeout {std::chrono::seconds(10)};
    std::chrono::milliseconds sql_budget {std::chrono::seconds(10)};
};

/// Per-episode tool state. The registered name is the one prompts and
/// exemplars use for the working table.
struct ToolContext
{
    Table current_table;
    std::string registered_name {kRegisteredTableName};
    ToolSettings settings;
};

/// Single SELECT over the working table. Engine errors become Failure with
/// the engine's text; non-SELECT input becomes Failure "statement not allowed".
ToolResult execute_sql(const ToolContext& context, std::string_view code);

/// Request line written to the sandbox's stdin.
std::string sandbox_request_json(const Table& table, std::string_view code, double timeout_s);

/// Interprets the sandbox's stdout. Malformed replies become Failure.
ToolResult parse_sandbox_reply(std::string_view stdout_text, std::string_view stderr_text);

/// Runs a script in the sandbox process. Throws SandboxUnavailableError when
/// the runner cannot be found or started; every other problem, including
/// the timeout, is a Failure.
ToolResult execute_script(const ToolContext& context, std::string_view code);

struct ProgramOutcome
{
    /// T_k as shown to the agents: the result table, a 1x1 `result` table
    /// for scalars, or a 1-column `error` table carrying the failure text.
    Table observation;
    bool ok = false;
    /// True when the result is a table, i.e. when it may become the next
    /// working table.
    bool tabular = false;
};

ProgramOutcome to_outcome(const ToolResult& result);

/// Dispatches on the program kind. Never throws for tool failures
/// (SandboxUnavailableError still propagates).
ProgramOutcome run_program(const ToolContext& context, const ToolProgram& program);

/// Observation table used when the query agent produced no usable program.
Table error_table(std::string message);

} // namespace orchestra
