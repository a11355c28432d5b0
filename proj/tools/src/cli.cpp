// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <orchestra/bench.hpp>
#include <orchestra/config.hpp>
#include <orchestra/error.hpp>
#include <orchestra/openai_backend.hpp>
#include <orchestra/scripted_backend.hpp>
#include <orchestra/trace_io.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

namespace orchestra::cli
{

namespace
{

namespace fs = std::filesystem;

struct CommonFlags
{
    std::string config;
    std::string scripted;
    std::optional<std::string> endpoint;
    std::optional<std::string> model;
    std::optional<std::string> prompts;
    std::optional<std::string> family;
    std::optional<std::string> sandbox;
    std::optional<int> m;
    std::optional<int> max_rounds;
    std::optional<double> temperature;
    std::optional<std::int64_t> seed;
    std::optional<int> decision_draws;
    std::string mode = "orchestra";
};

void add_common(CLI::App* cmd, CommonFlags& flags)
{
    cmd->add_option("--config", flags.config, "Config file ([section] key = value)")->check(CLI::ExistingFile);
    cmd->add_option("--mode", flags.mode, "orchestra, two-agent, cot or react")
        ->check(CLI::IsMember({"orchestra", "two-agent", "cot", "react"}));
    cmd->add_option("--m", flags.m, "Sampled reasoning paths per question")->check(CLI::PositiveNumber);
    cmd->add_option("--max-rounds", flags.max_rounds, "Round cap per episode")->check(CLI::PositiveNumber);
    cmd->add_option("--temperature", flags.temperature, "Sampling temperature")->check(CLI::Range(0.0, 2.0));
    cmd->add_option("--seed", flags.seed, "Base seed; sample i sends seed+i");
    cmd->add_option("--decision-draws", flags.decision_draws, "Decision completions per path")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--endpoint", flags.endpoint, "OpenAI-compatible base URL");
    cmd->add_option("--model", flags.model, "Model name sent with each request");
    cmd->add_option("--prompts", flags.prompts, "Exemplar directory");
    cmd->add_option("--family", flags.family, "Exemplar family for ad-hoc questions");
    cmd->add_option("--sandbox", flags.sandbox, "Script sandbox command");
    cmd->add_option("--scripted", flags.scripted, "Replay a JSON transcript instead of calling an endpoint")
        ->check(CLI::ExistingFile)
        ->group("Testing");
}

RunConfig resolve(const CommonFlags& flags)
{
    auto cfg = default_run_config();
    if (!flags.config.empty())
        cfg = apply_config(ConfigFile::load(flags.config), std::move(cfg));
    if (flags.endpoint)
        cfg.endpoint.base_url = *flags.endpoint;
    if (flags.model)
        cfg.llm.model = *flags.model;
    if (flags.prompts)
        cfg.prompts_dir = *flags.prompts;
    if (flags.family)
        cfg.family = *flags.family;
    if (flags.sandbox)
    {
        auto words = std::vector<std::string> {};
        auto in = std::istringstream(*flags.sandbox);
        for (std::string w; in >> w;)
            words.push_back(w);
        if (!words.empty())
            cfg.tools.sandbox_command = std::move(words);
    }
    if (flags.m)
        cfg.episode.m_samples = *flags.m;
    if (flags.max_rounds)
        cfg.episode.max_rounds = *flags.max_rounds;
    if (flags.temperature)
        cfg.episode.temperature = *flags.temperature;
    if (flags.seed)
        cfg.episode.seed_base = *flags.seed;
    if (flags.decision_draws)
        cfg.episode.decision_draws = *flags.decision_draws;
    cfg.episode.validate();
    return cfg;
}

std::unique_ptr<Backend> make_backend(const RunConfig& cfg, const CommonFlags& flags)
{
    if (!flags.scripted.empty())
        return std::make_unique<ScriptedBackend>(load_script_file(flags.scripted));
    return std::make_unique<OpenAIBackend>(cfg.endpoint);
}

ExemplarLibrary load_exemplars(const RunConfig& cfg, std::ostream& err)
{
    if (fs::is_directory(cfg.prompts_dir))
        return ExemplarLibrary::load(cfg.prompts_dir);
    err << "warning: prompts directory " << cfg.prompts_dir << " not found, running without exemplars\n";
    return {};
}

Table load_table_arg(const std::string& path, const std::string& format)
{
    auto fmt = format.empty() ? table_format_for_path(path) : parse_table_format(format);
    return load_table_file(path, fmt);
}

TQATask adhoc_task(std::string id, Table table, std::string question, const RunConfig& cfg,
                   const std::optional<std::string>& hint)
{
    auto task = TQATask {};
    task.id = std::move(id);
    task.table = std::move(table);
    task.question = std::move(question);
    task.family = cfg.family;
    task.answer_format_hint = hint ? *hint : std::string(default_answer_hint(cfg.family));
    return task;
}

int print_record(const TaskRecord& record, std::ostream& out, std::ostream& err)
{
    if (record.error)
    {
        err << "error: " << *record.error << "\n";
        return 1;
    }
    out << "answer: " << record.prediction << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err)
{
    auto app = CLI::App {"Multi-agent table question answering"};
    app.name("orchestra");
    app.require_subcommand(1);

    auto run_flags = CommonFlags {};
    std::string run_table, run_format, run_question, run_traces = "orchestra-traces.jsonl";
    std::optional<std::string> run_hint;
    auto* run_cmd = app.add_subcommand("run", "Answer one question about a table");
    run_cmd->add_option("--table", run_table, "Table file (csv, tsv, json, md)")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--format", run_format, "Table format when the extension is ambiguous");
    run_cmd->add_option("--question", run_question, "Question to answer")->required();
    run_cmd->add_option("--hint", run_hint, "Answer-format constraint");
    run_cmd->add_option("--traces", run_traces, "JSON-lines trace file")->capture_default_str();
    add_common(run_cmd, run_flags);

    auto bench_flags = CommonFlags {};
    std::string bench_dataset, bench_kind = "unified-jsonl", bench_out = "report.json", bench_traces;
    std::optional<int> bench_concurrency;
    auto* bench_cmd = app.add_subcommand("bench", "Run a dataset and write a report");
    bench_cmd->add_option("--dataset", bench_dataset, "Dataset file or directory")->required();
    bench_cmd->add_option("--kind", bench_kind, "unified-jsonl, wikitq, tabfact or tablebench")->capture_default_str();
    bench_cmd->add_option("--concurrency", bench_concurrency, "Tasks in flight")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", bench_out, "Report path")->capture_default_str();
    bench_cmd->add_option("--traces", bench_traces, "JSON-lines trace file (default: <out>.traces.jsonl)");
    add_common(bench_cmd, bench_flags);

    std::string convert_kind, convert_in, convert_out;
    auto* convert_cmd = app.add_subcommand("convert", "Convert a benchmark to unified JSONL");
    convert_cmd->add_option("--kind", convert_kind, "wikitq, tabfact or tablebench")
        ->required()
        ->check(CLI::IsMember({"wikitq", "tabfact", "tablebench"}));
    convert_cmd->add_option("--in", convert_in, "Benchmark directory or file")->required()->check(CLI::ExistingPath);
    convert_cmd->add_option("--out", convert_out, "Output JSONL")->required();

    auto repl_flags = CommonFlags {};
    std::string repl_table, repl_format, repl_traces;
    auto* repl_cmd = app.add_subcommand("repl", "Ask questions about one table interactively");
    repl_cmd->add_option("--table", repl_table, "Table file")->required()->check(CLI::ExistingFile);
    repl_cmd->add_option("--format", repl_format, "Table format");
    repl_cmd->add_option("--traces", repl_traces, "JSON-lines trace file");
    add_common(repl_cmd, repl_flags);

    try
    {
        auto reversed = std::vector<std::string>(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e, out, err);
    }

    try
    {
        if (*run_cmd)
        {
            auto cfg = resolve(run_flags);
            auto backend = make_backend(cfg, run_flags);
            auto resources = BenchResources {RoleBackends(*backend), cfg.llm, load_exemplars(cfg, err), cfg.tools};
            auto options = BenchOptions {parse_bench_mode(run_flags.mode), cfg.episode, 1, std::nullopt};
            auto task = adhoc_task("cli", load_table_arg(run_table, run_format), run_question, cfg, run_hint);
            auto writer = TraceWriter(run_traces);
            auto code = print_record(run_task(task, options, resources, &writer), out, err);
            out << "traces: " << writer.path().string() << "\n";
            return code;
        }

        if (*bench_cmd)
        {
            auto cfg = resolve(bench_flags);
            auto backend = make_backend(cfg, bench_flags);
            auto resources = BenchResources {RoleBackends(*backend), cfg.llm, load_exemplars(cfg, err), cfg.tools};
            auto traces = bench_traces.empty() ? fs::path(bench_out + ".traces.jsonl") : fs::path(bench_traces);
            auto options = BenchOptions {parse_bench_mode(bench_flags.mode), cfg.episode,
                                         bench_concurrency.value_or(cfg.concurrency), traces};
            auto tasks = load_dataset(bench_dataset, parse_dataset_kind(bench_kind));
            auto report = run_benchmark(tasks, options, resources);
            auto file = std::ofstream(bench_out);
            if (!file)
                throw Error("cannot write " + bench_out);
            file << report_to_json(report) << "\n";
            out << "mode: " << report.mode << "\n"
                << "accuracy: " << report.accuracy << " (" << report.correct_count << "/" << report.task_count << ")\n"
                << "mean requests: " << report.cost.mean_requests << "\n"
                << "report: " << bench_out << "\n"
                << "traces: " << traces.string() << "\n";
            return 0;
        }

        if (*convert_cmd)
        {
            auto tasks = load_dataset(convert_in, parse_dataset_kind(convert_kind));
            auto file = std::ofstream(convert_out);
            if (!file)
                throw Error("cannot write " + convert_out);
            write_unified_jsonl(tasks, file);
            out << "wrote " << tasks.size() << " tasks to " << convert_out << "\n";
            return 0;
        }

        if (*repl_cmd)
        {
            auto cfg = resolve(repl_flags);
            auto backend = make_backend(cfg, repl_flags);
            auto resources = BenchResources {RoleBackends(*backend), cfg.llm, load_exemplars(cfg, err), cfg.tools};
            auto options = BenchOptions {parse_bench_mode(repl_flags.mode), cfg.episode, 1, std::nullopt};
            auto table = load_table_arg(repl_table, repl_format);
            auto writer = repl_traces.empty() ? nullptr : std::make_unique<TraceWriter>(repl_traces);
            out << describe_schema(table) << " (" << table.row_count() << " rows)\n";
            int asked = 0;
            for (std::string line; out << "> " << std::flush, std::getline(in, line);)
            {
                auto question = std::string(line);
                question.erase(0, question.find_first_not_of(" \t"));
                question.erase(question.find_last_not_of(" \t\r") + 1);
                if (question.empty())
                    continue;
                if (question == ":q" || question == ":quit")
                    break;
                auto task = adhoc_task("repl-" + std::to_string(++asked), table, question, cfg, std::nullopt);
                print_record(run_task(task, options, resources, writer.get()), out, err);
            }
            out << "\n";
            return 0;
        }
    }
    catch (const std::exception& e)
    {
        err << "orchestra: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace orchestra::cli
