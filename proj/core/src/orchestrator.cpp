// SPDX-License-Identifier: Apache-2.0
#include <orchestra/normalize.hpp>
#include <orchestra/orchestrator.hpp>
#include <orchestra/trace_io.hpp>

#include "parallel.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <limits>

namespace orchestra
{

void EpisodeConfig::validate() const
{
    if (max_rounds < 1)
        throw ContractViolation("max_rounds must be >= 1");
    if (m_samples < 1)
        throw ContractViolation("m_samples must be >= 1");
    if (decision_draws < 1)
        throw ContractViolation("decision_draws must be >= 1");
    if (concurrency < 1)
        throw ContractViolation("concurrency must be >= 1");
    if (render.max_rows < 1)
        throw ContractViolation("render.max_rows must be >= 1");
}

Backend& RoleBackends::for_role(AgentRole role) const
{
    auto* backend = role == AgentRole::logic ? logic : role == AgentRole::query ? query : decision;
    if (backend == nullptr)
        throw ContractViolation("no backend configured for the " + std::string(to_string(role)) + " agent");
    return *backend;
}

AgentSession::AgentSession(const RoleBackends& backends, LlmSettings settings, std::optional<std::int64_t> seed):
    _backends(backends), _settings(std::move(settings)), _seed(seed)
{
}

ChatResponse AgentSession::chat(AgentRole role, std::vector<ChatMessage> messages, double temperature)
{
    auto& backend = _backends.for_role(role);
    auto request = ChatRequest {
        .model = _settings.model,
        .messages = std::move(messages),
        .temperature = temperature,
        .max_tokens = _settings.max_tokens,
        .seed = _seed,
    };
    return with_retries([&] { return complete_chat(backend, request, _ledger); }, _settings.retry);
}

std::string_view to_string(TerminationReason reason)
{
    switch (reason)
    {
        case TerminationReason::answer: return "answer";
        case TerminationReason::forced: return "forced";
        case TerminationReason::parse_failure: return "parse_failure";
        case TerminationReason::backend_error: return "backend_error";
    }
    return "unknown";
}

CandidateAnswer make_candidate(std::string text, int sample_index)
{
    auto normalized = normalize_answer(text);
    return {std::move(text), std::move(normalized), sample_index};
}

namespace
{

constexpr std::string_view kNoProgramMessage = "no executable program in the query agent's reply";

// Re-prompt with the failed reply and a reminder appended.
std::vector<ChatMessage> with_reminder(std::vector<ChatMessage> messages, const std::string& reply,
                                       std::string_view reminder)
{
    if (!text::trim(reply).empty())
        messages.push_back(ChatMessage::assistant(reply));
    messages.push_back(ChatMessage::user(std::string(reminder)));
    return messages;
}

std::optional<LogicOutput> logic_step(AgentSession& session, const std::vector<ChatMessage>& prompt,
                                      double temperature)
{
    auto reply = session.chat(AgentRole::logic, prompt, temperature).content;
    try
    {
        return parse_logic_output(reply);
    }
    catch (const ParseError&)
    {
    }
    auto retry = session.chat(AgentRole::logic, with_reminder(prompt, reply, kLogicFormatReminder), temperature);
    try
    {
        return parse_logic_output(retry.content);
    }
    catch (const ParseError&)
    {
        return std::nullopt;
    }
}

std::optional<ToolProgram> query_step(AgentSession& session, const std::vector<ChatMessage>& prompt,
                                      double temperature)
{
    auto reply = session.chat(AgentRole::query, prompt, temperature).content;
    try
    {
        return parse_tool_program(reply);
    }
    catch (const ParseError&)
    {
    }
    auto retry = session.chat(AgentRole::query, with_reminder(prompt, reply, kQueryFormatReminder), temperature);
    try
    {
        return parse_tool_program(retry.content);
    }
    catch (const ParseError&)
    {
        return std::nullopt;
    }
}

// Fills `trace` as the episode progresses so an aborted run keeps the
// completed rounds.
void run_episode_into(EpisodeTrace& trace, const TQATask& task, const EpisodeConfig& cfg,
                      const OrchestraResources& resources, AgentSession& session)
{
    cfg.validate();
    const auto options = PromptOptions {task.answer_format_hint, cfg.render};
    auto logic_memory = AgentMemory(AgentRole::logic, task.question, task.table);
    auto query_memory = AgentMemory(AgentRole::query, task.question, task.table);
    auto context = ToolContext {task.table, std::string(kRegisteredTableName), resources.tools};

    for (int k = 0; k < cfg.max_rounds; ++k)
    {
        auto prompt = build_logic_prompt(resources.exemplars.logic, logic_memory, options);
        auto output = logic_step(session, prompt, cfg.temperature);
        if (!output)
        {
            trace.terminated_by = TerminationReason::parse_failure;
            return;
        }
        if (const auto* answer = std::get_if<LogicAnswer>(&*output))
        {
            trace.preliminary_answer = answer->text;
            trace.terminated_by = TerminationReason::answer;
            return;
        }
        const auto& step = std::get<LogicContinue>(*output);

        auto query_prompt = build_query_prompt(resources.exemplars.query, query_memory, step.instruction,
                                               context.current_table, cfg.render);
        auto program = query_step(session, query_prompt, cfg.temperature);
        auto outcome = program ? run_program(context, *program)
                               : ProgramOutcome {error_table(std::string(kNoProgramMessage)), false, false};
        if (outcome.ok && outcome.tabular)
            context.current_table = outcome.observation;

        auto artifacts = RoundArtifacts {step.reasoning, step.instruction, std::nullopt, outcome.observation};
        update_memory(logic_memory, artifacts);
        artifacts.program = program;
        update_memory(query_memory, artifacts);

        trace.rounds.push_back({step.reasoning, step.instruction, program, outcome.observation, outcome.ok});
    }

    auto prompt = build_logic_prompt(resources.exemplars.logic, logic_memory, options);
    prompt.push_back(ChatMessage::user(std::string(kForcedAnswerPrompt)));
    auto reply = std::string(text::trim(session.chat(AgentRole::logic, std::move(prompt), cfg.temperature).content));
    if (!reply.empty())
        trace.preliminary_answer = std::move(reply);
    trace.terminated_by = TerminationReason::forced;
}

} // namespace

EpisodeTrace run_episode(const TQATask& task, const EpisodeConfig& cfg, const OrchestraResources& resources,
                         AgentSession& session)
{
    auto trace = EpisodeTrace {};
    run_episode_into(trace, task, cfg, resources, session);
    return trace;
}

RefinedContext refine_trace(const EpisodeTrace& trace, const TQATask& task)
{
    auto context = RefinedContext {task.question, task.table, {}};
    context.steps.reserve(trace.rounds.size());
    for (const auto& round: trace.rounds)
        context.steps.push_back({round.reasoning, round.instruction, round.observation});
    return context;
}

std::vector<ChatMessage> build_decision_prompt(const EpisodeTrace& trace, std::string_view question,
                                               const Table& initial_table, std::string_view answer_format_hint,
                                               const RenderOptions& render)
{
    auto task = TQATask {.id = {}, .table = initial_table, .question = std::string(question), .gold_answers = {}};
    return build_decision_prompt(refine_trace(trace, task), PromptOptions {std::string(answer_format_hint), render});
}

CandidateAnswer decide(const EpisodeTrace& trace, const TQATask& task, const EpisodeConfig& cfg, AgentSession& session,
                       int sample_index)
{
    auto fallback = trace.preliminary_answer.value_or("");
    if (!cfg.decision_agent_enabled)
        return make_candidate(std::move(fallback), sample_index);

    auto prompt = build_decision_prompt(refine_trace(trace, task), PromptOptions {task.answer_format_hint, cfg.render});
    auto draws = std::vector<CandidateAnswer> {};
    for (int d = 0; d < cfg.decision_draws; ++d)
    {
        auto reply = session.chat(AgentRole::decision, prompt, cfg.temperature).content;
        auto text = std::string {};
        try
        {
            text = parse_decision_output(reply);
        }
        catch (const EmptyAnswerError&)
        {
            text = fallback;
        }
        draws.push_back(make_candidate(std::move(text), d));
    }
    if (draws.size() == 1)
        return make_candidate(std::move(draws.front().text), sample_index);
    return make_candidate(aggregate_majority(draws).text, sample_index);
}

FinalAnswer aggregate_majority(const std::vector<CandidateAnswer>& candidates)
{
    if (candidates.empty())
        throw ContractViolation("aggregate_majority needs at least one candidate");

    bool all_blank = std::all_of(candidates.begin(), candidates.end(),
                                 [](const CandidateAnswer& c) { return c.normalized.empty(); });

    struct Tally
    {
        int count = 0;
        int first_index = std::numeric_limits<int>::max();
        const CandidateAnswer* earliest = nullptr;
    };
    auto tallies = std::map<std::string, Tally> {};
    for (const auto& candidate: candidates)
    {
        if (candidate.normalized.empty() && !all_blank)
            continue;
        auto& tally = tallies[candidate.normalized];
        ++tally.count;
        if (candidate.sample_index < tally.first_index)
        {
            tally.first_index = candidate.sample_index;
            tally.earliest = &candidate;
        }
    }

    auto result = FinalAnswer {};
    const Tally* winner = nullptr;
    for (const auto& [form, tally]: tallies)
    {
        result.vote_counts[form] = tally.count;
        if (winner == nullptr || tally.count > winner->count
            || (tally.count == winner->count && tally.first_index < winner->first_index))
            winner = &tally;
    }
    result.text = winner->earliest->text;
    result.winner_count = winner->count;
    return result;
}

OrchestraResult run_orchestra(const TQATask& task, const EpisodeConfig& cfg, const OrchestraResources& resources,
                              TraceWriter* traces)
{
    cfg.validate();
    auto samples = std::vector<SampleRecord>(static_cast<std::size_t>(cfg.m_samples));

    detail::parallel_for(samples.size(), cfg.concurrency, [&](std::size_t i) {
        auto index = static_cast<int>(i);
        auto seed = cfg.seed_base ? std::optional<std::int64_t>(*cfg.seed_base + index) : std::nullopt;
        auto session = AgentSession(resources.backends, resources.llm, seed);
        auto& sample = samples[i];
        try
        {
            run_episode_into(sample.trace, task, cfg, resources, session);
            sample.candidate = decide(sample.trace, task, cfg, session, index);
        }
        catch (const BackendError& e)
        {
            sample.trace.terminated_by = TerminationReason::backend_error;
            sample.trace.error = e.what();
            sample.candidate = make_candidate("", index);
        }
        sample.usage = session.usage();
        if (traces != nullptr)
            traces->write(task.id, index, sample.trace, sample.candidate, sample.usage);
    });

    auto result = OrchestraResult {};
    auto candidates = std::vector<CandidateAnswer> {};
    for (const auto& sample: samples)
    {
        result.usage += sample.usage;
        candidates.push_back(sample.candidate);
    }
    result.answer = aggregate_majority(candidates);
    result.samples = std::move(samples);
    return result;
}

} // namespace orchestra
