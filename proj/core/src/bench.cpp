// SPDX-License-Identifier: Apache-2.0
#include <orchestra/bench.hpp>
#include <orchestra/error.hpp>
#include <orchestra/normalize.hpp>
#include <orchestra/trace_io.hpp>

#include "parallel.hpp"
#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>

namespace orchestra
{

namespace
{

constexpr std::string_view kCotRoleCard =
    "You answer questions about a table. You cannot run code. Read the table carefully and reason step by "
    "step in plain text, then finish with a line of the form\n"
    "ANSWER: <answer>";

constexpr std::string_view kReactRoleCard =
    "You answer questions about a table, registered as DF, by running programs against it. Each turn, "
    "think about what is still needed and then either run one program or give the answer.\n"
    "\n"
    "To run an SQLite query:\n"
    "SQL:\n"
    "```sql\n"
    "SELECT ... FROM DF ...\n"
    "```\n"
    "To run a Python script over the pandas DataFrame `df`:\n"
    "Python:\n"
    "```python\n"
    "...\n"
    "```\n"
    "The result of each program is shown to you as an OBSERVATION and becomes the new DF when it is a "
    "table. When the observations are sufficient, reply with\n"
    "ANSWER: <answer>";

constexpr std::string_view kReactFormatReminder =
    "Your previous reply contained neither a program nor an answer. Reply with one ```sql or ```python "
    "program, or with ANSWER: <answer>.";

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

RenderOptions full_render(const Table& table)
{
    return RenderOptions {.max_rows = std::max<std::size_t>(1, table.row_count()), .include_row_count_footer = false};
}

std::optional<std::string> react_answer(std::string_view reply)
{
    try
    {
        auto output = parse_logic_output(reply);
        if (const auto* answer = std::get_if<LogicAnswer>(&output))
            return answer->text;
    }
    catch (const ParseError&)
    {
    }
    return std::nullopt;
}

std::optional<ToolProgram> react_program(std::string_view reply)
{
    try
    {
        return parse_tool_program(reply);
    }
    catch (const ParseError&)
    {
        return std::nullopt;
    }
}

} // namespace

std::vector<ChatMessage> build_cot_prompt(const TQATask& task)
{
    return {
        ChatMessage::system(with_hint(kCotRoleCard, task.answer_format_hint)),
        ChatMessage::user("TABLE:\n" + render_markdown(task.table, full_render(task.table)) + "\n\nQUESTION: "
                          + task.question),
    };
}

std::string baseline_cot(const TQATask& task, const EpisodeConfig& cfg, AgentSession& session)
{
    auto reply = session.chat(AgentRole::decision, build_cot_prompt(task), cfg.temperature).content;
    try
    {
        return parse_decision_output(reply);
    }
    catch (const EmptyAnswerError&)
    {
        return "";
    }
}

ReactOutcome baseline_react(const TQATask& task, const EpisodeConfig& cfg, const OrchestraResources& resources,
                            AgentSession& session)
{
    cfg.validate();
    auto outcome = ReactOutcome {};
    auto& trace = outcome.trace;
    auto context = ToolContext {task.table, std::string(kRegisteredTableName), resources.tools};

    auto messages = std::vector<ChatMessage> {ChatMessage::system(with_hint(kReactRoleCard, task.answer_format_hint))};
    for (const auto& exemplar: resources.exemplars.react)
        messages.insert(messages.end(), exemplar.turns.begin(), exemplar.turns.end());
    messages.push_back(ChatMessage::user("QUESTION: " + task.question + "\n\nTABLE " + std::string(kRegisteredTableName)
                                         + " (columns: " + describe_schema(task.table) + "):\n"
                                         + render_markdown(task.table, cfg.render)));

    for (int k = 0; k < cfg.max_rounds; ++k)
    {
        auto reply = session.chat(AgentRole::logic, messages, cfg.temperature).content;
        auto answer = react_answer(reply);
        auto program = answer ? std::nullopt : react_program(reply);
        if (!answer && !program)
        {
            if (!text::trim(reply).empty())
                messages.push_back(ChatMessage::assistant(reply));
            messages.push_back(ChatMessage::user(std::string(kReactFormatReminder)));
            reply = session.chat(AgentRole::logic, messages, cfg.temperature).content;
            answer = react_answer(reply);
            program = answer ? std::nullopt : react_program(reply);
        }
        if (answer)
        {
            outcome.prediction = *answer;
            trace.preliminary_answer = *answer;
            trace.terminated_by = TerminationReason::answer;
            return outcome;
        }
        if (!program)
        {
            trace.terminated_by = TerminationReason::parse_failure;
            return outcome;
        }

        auto result = run_program(context, *program);
        if (result.ok && result.tabular)
            context.current_table = result.observation;
        messages.push_back(ChatMessage::assistant(reply));
        messages.push_back(ChatMessage::user("OBSERVATION:\n" + render_markdown(result.observation, cfg.render)));
        trace.rounds.push_back({std::string(text::trim(reply)), "", program, result.observation, result.ok});
    }

    messages.push_back(ChatMessage::user(std::string(kForcedAnswerPrompt)));
    auto reply = session.chat(AgentRole::logic, std::move(messages), cfg.temperature).content;
    try
    {
        outcome.prediction = parse_decision_output(reply);
        trace.preliminary_answer = outcome.prediction;
    }
    catch (const EmptyAnswerError&)
    {
    }
    trace.terminated_by = TerminationReason::forced;
    return outcome;
}

BenchMode parse_bench_mode(std::string_view name)
{
    auto lower = text::to_lower(name);
    if (lower == "orchestra")
        return BenchMode::orchestra;
    if (lower == "two-agent" || lower == "two_agent")
        return BenchMode::two_agent;
    if (lower == "cot")
        return BenchMode::cot;
    if (lower == "react")
        return BenchMode::react;
    throw ContractViolation("unknown mode: " + std::string(name));
}

std::string_view to_string(BenchMode mode)
{
    switch (mode)
    {
        case BenchMode::orchestra: return "orchestra";
        case BenchMode::two_agent: return "two-agent";
        case BenchMode::cot: return "cot";
        case BenchMode::react: return "react";
    }
    return "unknown";
}

TaskRecord run_task(const TQATask& task, const BenchOptions& options, const BenchResources& resources,
                    TraceWriter* traces)
{
    auto record = TaskRecord {};
    record.id = task.id;
    record.gold_answers = task.gold_answers;
    auto started = std::chrono::steady_clock::now();
    auto session = AgentSession(resources.backends, resources.llm, options.episode.seed_base);
    bool session_used = false;

    try
    {
        auto orchestra = OrchestraResources {resources.backends, resources.llm, resources.exemplars.get(task.family),
                                             resources.tools};
        switch (options.mode)
        {
            case BenchMode::orchestra:
            case BenchMode::two_agent:
            {
                auto cfg = options.episode;
                if (options.mode == BenchMode::two_agent)
                    cfg.decision_agent_enabled = false;
                auto result = run_orchestra(task, cfg, orchestra, traces);
                record.prediction = result.answer.text;
                record.usage = result.usage;
                break;
            }
            case BenchMode::cot:
            {
                session_used = true;
                record.prediction = baseline_cot(task, options.episode, session);
                if (traces != nullptr)
                {
                    auto trace = EpisodeTrace {};
                    trace.preliminary_answer = record.prediction;
                    traces->write(task.id, 0, trace, make_candidate(record.prediction, 0), session.usage());
                }
                break;
            }
            case BenchMode::react:
            {
                session_used = true;
                auto outcome = baseline_react(task, options.episode, orchestra, session);
                record.prediction = outcome.prediction;
                if (traces != nullptr)
                    traces->write(task.id, 0, outcome.trace, make_candidate(record.prediction, 0), session.usage());
                break;
            }
        }
    }
    catch (const std::exception& e)
    {
        record.error = e.what();
        record.prediction.clear();
    }
    if (session_used)
        record.usage = session.usage();
    record.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    record.correct = !record.error && evaluate_exact_match(record.prediction, record.gold_answers);
    return record;
}

RunReport summarize(std::string mode, std::vector<TaskRecord> records)
{
    auto report = RunReport {};
    report.mode = std::move(mode);
    report.task_count = static_cast<int>(records.size());
    double elapsed = 0.0;
    for (const auto& record: records)
    {
        report.correct_count += record.correct ? 1 : 0;
        report.total_usage += record.usage;
        elapsed += record.elapsed_s;
    }
    if (report.task_count > 0)
    {
        auto n = static_cast<double>(report.task_count);
        report.accuracy = report.correct_count / n;
        report.cost = CostReport {
            .mean_time_s = elapsed / n,
            .mean_requests = static_cast<double>(report.total_usage.requests) / n,
            .mean_input_tokens = static_cast<double>(report.total_usage.input_tokens) / n,
            .mean_output_tokens = static_cast<double>(report.total_usage.output_tokens) / n,
        };
    }
    report.per_task = std::move(records);
    return report;
}

RunReport run_benchmark(const std::vector<TQATask>& tasks, const BenchOptions& options,
                        const BenchResources& resources)
{
    if (tasks.empty())
        throw ContractViolation("run_benchmark needs at least one task");
    if (options.concurrency < 1)
        throw ContractViolation("concurrency must be >= 1");
    options.episode.validate();

    auto writer = options.trace_path ? std::make_unique<TraceWriter>(*options.trace_path) : nullptr;
    auto records = std::vector<TaskRecord>(tasks.size());
    detail::parallel_for(tasks.size(), options.concurrency,
                         [&](std::size_t i) { records[i] = run_task(tasks[i], options, resources, writer.get()); });

    auto report = summarize(std::string(to_string(options.mode)), std::move(records));
    report.trace_path = options.trace_path;
    return report;
}

std::string report_to_json(const RunReport& report)
{
    using json = nlohmann::ordered_json;
    auto usage_json = [](const UsageStats& usage) {
        return json {
            {"requests", usage.requests},
            {"input_tokens", usage.input_tokens},
            {"output_tokens", usage.output_tokens},
            {"wall_time_s", usage.wall_time_s},
        };
    };

    auto per_task = json::array();
    for (const auto& record: report.per_task)
    {
        auto item = json {
            {"id", record.id},
            {"prediction", record.prediction},
            {"gold", record.gold_answers},
            {"correct", record.correct},
            {"elapsed_s", record.elapsed_s},
            {"usage", usage_json(record.usage)},
        };
        if (record.error)
            item["error"] = *record.error;
        per_task.push_back(std::move(item));
    }

    auto out = json {
        {"mode", report.mode},
        {"task_count", report.task_count},
        {"correct_count", report.correct_count},
        {"accuracy", report.accuracy},
        {"cost",
         {
             {"mean_time_s", report.cost.mean_time_s},
             {"mean_requests", report.cost.mean_requests},
             {"mean_input_tokens", report.cost.mean_input_tokens},
             {"mean_output_tokens", report.cost.mean_output_tokens},
         }},
        {"total_usage", usage_json(report.total_usage)},
        {"trace_path", report.trace_path ? json(report.trace_path->string()) : json(nullptr)},
        {"per_task", std::move(per_task)},
    };
    return out.dump(2, ' ', false, json::error_handler_t::replace);
}

} // namespace orchestra
