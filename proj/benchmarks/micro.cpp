// SPDX-License-Identifier: Apache-2.0
// Microbenchmarks for the hot, model-free paths.
#include <orchestra/agents.hpp>
#include <orchestra/normalize.hpp>
#include <orchestra/orchestrator.hpp>
#include <orchestra/table.hpp>
#include <orchestra/tools.hpp>

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

namespace
{

orchestra::Table synthetic_table(std::size_t rows)
{
    auto body = std::vector<std::vector<std::string>> {};
    for (std::size_t i = 0; i < rows; ++i)
        body.push_back({"ship " + std::to_string(i), i % 3 == 0 ? "Auckland" : "Lyttelton",
                        std::to_string(10 + i % 17), std::to_string(1900 + i % 80)});
    return orchestra::Table("DF", {"name", "port", "knots", "built"}, std::move(body));
}

void BM_Normalize(benchmark::State& state)
{
    const std::vector<std::string> inputs = {"Yes.", "  The  Blue   Team ", "1,234,567", "12.50%", "\"Kestrel\"",
                                             "Carrow | Eskdale."};
    for (auto _: state)
        for (const auto& s: inputs)
            benchmark::DoNotOptimize(orchestra::normalize_answer(s));
}
BENCHMARK(BM_Normalize);

void BM_RenderMarkdown(benchmark::State& state)
{
    auto table = synthetic_table(static_cast<std::size_t>(state.range(0)));
    for (auto _: state)
        benchmark::DoNotOptimize(orchestra::render_markdown(table));
}
BENCHMARK(BM_RenderMarkdown)->Arg(10)->Arg(200);

void BM_LoadCsv(benchmark::State& state)
{
    auto csv = orchestra::table_to_delimited(synthetic_table(static_cast<std::size_t>(state.range(0))),
                                             orchestra::TableFormat::csv);
    for (auto _: state)
        benchmark::DoNotOptimize(orchestra::load_table(csv, orchestra::TableFormat::csv));
}
BENCHMARK(BM_LoadCsv)->Arg(10)->Arg(200);

void BM_ExecuteSql(benchmark::State& state)
{
    auto context = orchestra::ToolContext {synthetic_table(static_cast<std::size_t>(state.range(0))), "DF", {}};
    for (auto _: state)
        benchmark::DoNotOptimize(orchestra::execute_sql(
            context, "SELECT port, MAX(CAST(knots AS INTEGER)) FROM DF GROUP BY port ORDER BY port"));
}
BENCHMARK(BM_ExecuteSql)->Arg(10)->Arg(200);

void BM_AggregateMajority(benchmark::State& state)
{
    auto candidates = std::vector<orchestra::CandidateAnswer> {};
    const std::vector<std::string> texts = {"2,000", "2000", "5", "2000.0", "five", "", "2000"};
    for (std::size_t i = 0; i < texts.size(); ++i)
        candidates.push_back(orchestra::make_candidate(texts[i], static_cast<int>(i)));
    for (auto _: state)
        benchmark::DoNotOptimize(orchestra::aggregate_majority(candidates));
}
BENCHMARK(BM_AggregateMajority);

void BM_ParseReplies(benchmark::State& state)
{
    const std::string logic = "REASONING: the port column narrows it down\nINSTRUCTION: keep rows where port is Auckland";
    const std::string query = "Here you go.\n```sql\nSELECT * FROM DF WHERE port = 'Auckland'\n```";
    for (auto _: state)
    {
        benchmark::DoNotOptimize(orchestra::parse_logic_output(logic));
        benchmark::DoNotOptimize(orchestra::parse_tool_program(query));
    }
}
BENCHMARK(BM_ParseReplies);

} // namespace

BENCHMARK_MAIN();
