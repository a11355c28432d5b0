// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/agents.hpp>
#include <orchestra/exemplars.hpp>
#include <orchestra/llm.hpp>
#include <orchestra/task.hpp>
#include <orchestra/tools.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace orchestra
{

struct EpisodeConfig
{
    int max_rounds = 5;
    double temperature = 0.7;
    int m_samples = 5;
    bool decision_agent_enabled = true;
    /// Sample i sends seed `seed_base + i` with every request when set.
    std::optional<std::int64_t> seed_base;
    /// Decision completions per path; more than one means a per-path
    /// plurality vote before the vote across paths.
    int decision_draws = 1;
    /// Upper bound on samples of one task running at the same time.
    int concurrency = 1;
    /// Rendering of T_0 and T_k in every prompt.
    RenderOptions render;

    /// Throws ContractViolation for non-positive counts.
    void validate() const;
};

/// Backends per agent role. The single-backend form routes every role to
/// the same handle.
struct RoleBackends
{
    Backend* logic = nullptr;
    Backend* query = nullptr;
    Backend* decision = nullptr;

    RoleBackends() = default;
    explicit RoleBackends(Backend& all): logic(&all), query(&all), decision(&all) {}
    RoleBackends(Backend& logic_backend, Backend& query_backend, Backend& decision_backend):
        logic(&logic_backend), query(&query_backend), decision(&decision_backend)
    {
    }

    [[nodiscard]] Backend& for_role(AgentRole role) const;
};

/// Everything an episode needs besides the task and the episode knobs.
struct OrchestraResources
{
    RoleBackends backends;
    LlmSettings llm;
    ExemplarSet exemplars;
    ToolSettings tools;
};

/// Chat access for one sample. Every request of the sample, retries
/// included, is recorded in the session's ledger.
class AgentSession
{
  public:
    AgentSession(const RoleBackends& backends, LlmSettings settings, std::optional<std::int64_t> seed = std::nullopt);

    ChatResponse chat(AgentRole role, std::vector<ChatMessage> messages, double temperature);

    [[nodiscard]] UsageStats usage() const { return _ledger.total(); }

  private:
    RoleBackends _backends;
    LlmSettings _settings;
    std::optional<std::int64_t> _seed;
    UsageLedger _ledger;
};

struct Round
{
    std::string reasoning;
    std::string instruction;
    std::optional<ToolProgram> program;
    Table observation;
    bool ok = false;
};

enum class TerminationReason
{
    answer,
    forced,
    parse_failure,
    /// The backend failed for good; only recorded by run_orchestra and the
    /// benchmark drivers, run_episode rethrows instead.
    backend_error,
};

std::string_view to_string(TerminationReason reason);

struct EpisodeTrace
{
    std::vector<Round> rounds;
    std::optional<std::string> preliminary_answer;
    TerminationReason terminated_by = TerminationReason::answer;
    /// Error text of an aborted sample.
    std::string error;
};

struct CandidateAnswer
{
    std::string text;
    std::string normalized;
    int sample_index = 0;
};

CandidateAnswer make_candidate(std::string text, int sample_index);

struct FinalAnswer
{
    std::string text;
    std::map<std::string, int> vote_counts;
    int winner_count = 0;
};

/// The two-agent loop for one sampled path. BackendError propagates.
EpisodeTrace run_episode(const TQATask& task, const EpisodeConfig& cfg, const OrchestraResources& resources,
                         AgentSession& session);

/// Question, T_0 and the (R_k, I_k, T_k) triples; code is dropped.
RefinedContext refine_trace(const EpisodeTrace& trace, const TQATask& task);

std::vector<ChatMessage> build_decision_prompt(const EpisodeTrace& trace, std::string_view question,
                                               const Table& initial_table, std::string_view answer_format_hint,
                                               const RenderOptions& render = {});

/// Decision-agent answer for one path, falling back to the preliminary
/// answer on blank output and to "" when that is absent too. With the
/// decision agent disabled the preliminary answer is used directly.
CandidateAnswer decide(const EpisodeTrace& trace, const TQATask& task, const EpisodeConfig& cfg, AgentSession& session,
                       int sample_index = 0);

/// Plurality over normalized forms; ties go to the form seen at the lowest
/// sample index. Blank candidates only win when every candidate is blank.
/// Throws ContractViolation on an empty list.
FinalAnswer aggregate_majority(const std::vector<CandidateAnswer>& candidates);

struct SampleRecord
{
    EpisodeTrace trace;
    CandidateAnswer candidate;
    UsageStats usage;
};

struct OrchestraResult
{
    FinalAnswer answer;
    std::vector<SampleRecord> samples;
    UsageStats usage;
};

class TraceWriter;

/// m independent episodes, each followed by decide, then the vote. A sample
/// whose backend fails contributes an empty candidate. Sample records are
/// written to `traces` when given.
OrchestraResult run_orchestra(const TQATask& task, const EpisodeConfig& cfg, const OrchestraResources& resources,
                              TraceWriter* traces = nullptr);

} // namespace orchestra
