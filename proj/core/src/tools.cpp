// SPDX-License-Identifier: Apache-2.0
#include <orchestra/error.hpp>
#include <orchestra/sql_engine.hpp>
#include <orchestra/subprocess.hpp>
#include <orchestra/tools.hpp>

#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <system_error>

namespace orchestra
{

ToolResult execute_sql(const ToolContext& context, std::string_view code)
{
    if (!is_single_select(code))
        return Failure {"statement not allowed"};
    try
    {
        auto engine = SqlEngine(context.current_table, context.registered_name);
        return TableResult {engine.query(code, context.settings.sql_budget)};
    }
    catch (const SqlError& e)
    {
        return Failure {e.what()};
    }
    catch (const FormatError& e)
    {
        return Failure {e.what()};
    }
}

std::string sandbox_request_json(const Table& table, std::string_view code, double timeout_s)
{
    auto request = nlohmann::ordered_json::object();
    request["table_csv"] = table_to_delimited(table, TableFormat::csv);
    request["code"] = std::string(code);
    request["timeout_s"] = timeout_s;
    return request.dump();
}

ToolResult parse_sandbox_reply(std::string_view stdout_text, std::string_view stderr_text)
{
    auto body = text::trim(stdout_text);
    auto malformed = [&](std::string_view why) {
        auto message = "malformed sandbox reply (" + std::string(why) + ")";
        auto diagnostics = text::trim(stderr_text);
        if (!diagnostics.empty())
            message += ": " + std::string(diagnostics);
        return Failure {std::move(message)};
    };
    if (body.empty())
        return malformed("empty stdout");

    auto reply = nlohmann::json {};
    try
    {
        reply = nlohmann::json::parse(body);
    }
    catch (const nlohmann::json::parse_error&)
    {
        return malformed("not a single JSON object");
    }
    if (!reply.is_object())
        return malformed("not a JSON object");

    auto string_field = [&](const char* key) -> std::optional<std::string> {
        auto it = reply.find(key);
        if (it == reply.end() || !it->is_string())
            return std::nullopt;
        return it->get<std::string>();
    };

    auto status = string_field("status");
    if (status == "error")
    {
        auto message = string_field("message").value_or("");
        return Failure {message.empty() ? std::string("script failed") : message};
    }
    if (status != "ok")
        return malformed("unknown status");

    auto kind = string_field("kind");
    if (kind == "table")
    {
        auto payload = string_field("payload_csv");
        if (!payload)
            return malformed("missing payload_csv");
        try
        {
            return TableResult {load_table(*payload, TableFormat::csv, "result")};
        }
        catch (const FormatError& e)
        {
            return Failure {std::string("sandbox returned an unreadable table: ") + e.what()};
        }
    }
    if (kind == "scalar")
    {
        auto payload = string_field("payload");
        if (!payload)
            return malformed("missing payload");
        return ScalarResult {*payload};
    }
    return malformed("unknown kind");
}

ToolResult execute_script(const ToolContext& context, std::string_view code)
{
    const auto& command = context.settings.sandbox_command;
    if (command.empty() || find_executable(command.front()).empty())
        throw SandboxUnavailableError("script sandbox not found: "
                                      + (command.empty() ? std::string("<unset>") : command.front()));

    auto timeout = context.settings.sandbox_timeout;
    auto request = sandbox_request_json(context.current_table, code,
                                        std::chrono::duration<double>(timeout).count());
    auto process = ProcessResult {};
    try
    {
        process = run_process(command, request, timeout);
    }
    catch (const std::system_error& e)
    {
        throw SandboxUnavailableError(std::string("cannot start script sandbox: ") + e.what());
    }

    if (process.timed_out)
        return Failure {"sandbox timeout"};
    if (text::trim(process.stdout_text).empty() && process.exit_code.value_or(-1) != 0)
    {
        auto diagnostics = std::string(text::trim(process.stderr_text));
        if (diagnostics.empty())
            diagnostics = process.signal ? "sandbox killed by signal " + std::to_string(*process.signal)
                                         : "sandbox exited with status " + std::to_string(process.exit_code.value_or(-1));
        return Failure {diagnostics};
    }
    return parse_sandbox_reply(process.stdout_text, process.stderr_text);
}

Table error_table(std::string message)
{
    if (message.empty())
        message = "unknown error";
    return Table("error", {"error"}, {{std::move(message)}});
}

ProgramOutcome to_outcome(const ToolResult& result)
{
    if (const auto* table = std::get_if<TableResult>(&result))
        return {table->table, true, true};
    if (const auto* scalar = std::get_if<ScalarResult>(&result))
        return {Table("result", {"result"}, {{scalar->text}}), true, false};
    return {error_table(std::get<Failure>(result).message), false, false};
}

ProgramOutcome run_program(const ToolContext& context, const ToolProgram& program)
{
    switch (program.kind())
    {
        case ToolProgram::Kind::sql: return to_outcome(execute_sql(context, program.code()));
        case ToolProgram::Kind::script: return to_outcome(execute_script(context, program.code()));
    }
    return {error_table("unknown program kind"), false, false};
}

} // namespace orchestra
