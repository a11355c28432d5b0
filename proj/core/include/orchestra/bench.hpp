// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/exemplars.hpp>
#include <orchestra/orchestrator.hpp>
#include <orchestra/task.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orchestra
{

// ---- datasets -------------------------------------------------------------

enum class DatasetKind
{
    unified_jsonl,
    wikitq,
    tabfact,
    tablebench,
};

/// Accepts `unified-jsonl` (or `unified`), `wikitq`, `tabfact`, `tablebench`.
DatasetKind parse_dataset_kind(std::string_view name);
std::string_view to_string(DatasetKind kind);

/// Native format, one task per line:
/// {"id", "question", "gold": [..], "table": {"columns": [..], "rows": [[..]]},
///  "hint"?, "family"?}. Blank lines are skipped. Errors name the line.
std::vector<TQATask> parse_unified_jsonl(std::string_view source);

/// WikiTableQuestions question TSV (id, utterance, context, targetValue).
/// Table paths in `context` resolve against `root`.
std::vector<TQATask> parse_wikitq_tsv(std::string_view source, const std::filesystem::path& root);

/// TabFact statements file: {"<table id>": [[statements], [labels], caption]}
/// with `#`-separated tables read from `table_dir`. Label 1 becomes gold
/// "yes", label 0 becomes "no".
std::vector<TQATask> parse_tabfact_json(std::string_view source, const std::filesystem::path& table_dir);

/// TableBench JSONL: id, question, answer and table {"columns", "data"}
/// (the table may also be a JSON-encoded string).
std::vector<TQATask> parse_tablebench_jsonl(std::string_view source);

/// Loads `path`, a file in the given format. For the benchmark kinds a
/// directory is accepted too and searched for the conventional file names.
std::vector<TQATask> load_dataset(const std::filesystem::path& path, DatasetKind kind);

std::string task_to_unified_json(const TQATask& task);
void write_unified_jsonl(const std::vector<TQATask>& tasks, std::ostream& out);

// ---- baselines ------------------------------------------------------------

/// One step-by-step completion over the full table, no tools.
std::string baseline_cot(const TQATask& task, const EpisodeConfig& cfg, AgentSession& session);

/// Role card used by the single-call baseline.
std::vector<ChatMessage> build_cot_prompt(const TQATask& task);

struct ReactOutcome
{
    std::string prediction;
    EpisodeTrace trace;
};

/// Single agent whose one conversation accumulates all code and
/// observations. Uses the react exemplars, the round cap and the forced
/// answer of the main loop. BackendError propagates.
ReactOutcome baseline_react(const TQATask& task, const EpisodeConfig& cfg, const OrchestraResources& resources,
                            AgentSession& session);

// ---- runs -----------------------------------------------------------------

enum class BenchMode
{
    orchestra,
    two_agent,
    cot,
    react,
};

/// Accepts `orchestra`, `two-agent`, `cot`, `react`.
BenchMode parse_bench_mode(std::string_view name);
std::string_view to_string(BenchMode mode);

struct TaskRecord
{
    std::string id;
    std::string prediction;
    std::vector<std::string> gold_answers;
    bool correct = false;
    /// Set when the pipeline failed for this task.
    std::optional<std::string> error;
    UsageStats usage;
    double elapsed_s = 0.0;
};

struct CostReport
{
    double mean_time_s = 0.0;
    double mean_requests = 0.0;
    double mean_input_tokens = 0.0;
    double mean_output_tokens = 0.0;
};

struct RunReport
{
    std::string mode;
    double accuracy = 0.0;
    int correct_count = 0;
    int task_count = 0;
    std::vector<TaskRecord> per_task;
    CostReport cost;
    UsageStats total_usage;
    std::optional<std::filesystem::path> trace_path;
};

struct BenchResources
{
    RoleBackends backends;
    LlmSettings llm;
    ExemplarLibrary exemplars;
    ToolSettings tools;
};

struct BenchOptions
{
    BenchMode mode = BenchMode::orchestra;
    EpisodeConfig episode;
    /// Tasks in flight at once.
    int concurrency = 1;
    /// JSON-lines trace file; none when unset.
    std::optional<std::filesystem::path> trace_path;
};

/// Runs one task through the selected pipeline. Failures are caught and
/// recorded as an incorrect record with `error` set.
TaskRecord run_task(const TQATask& task, const BenchOptions& options, const BenchResources& resources,
                    TraceWriter* traces = nullptr);

/// Per-task records in input order, accuracy and per-question cost means.
/// mean_time_s averages task wall time; the other means are ledger totals
/// divided by the task count. Throws ContractViolation on an empty list.
RunReport run_benchmark(const std::vector<TQATask>& tasks, const BenchOptions& options,
                        const BenchResources& resources);

/// Deterministic fold of records into a report (records keep their order).
RunReport summarize(std::string mode, std::vector<TaskRecord> records);

std::string report_to_json(const RunReport& report);

} // namespace orchestra
