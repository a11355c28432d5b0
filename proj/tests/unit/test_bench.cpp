// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <orchestra/bench.hpp>
#include <orchestra/error.hpp>
#include <orchestra/scripted_backend.hpp>
#include <orchestra/trace_io.hpp>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace orchestra;
using namespace orchestra::testing;
namespace fs = std::filesystem;

namespace
{

void write_file(const fs::path& path, const std::string& content)
{
    fs::create_directories(path.parent_path());
    auto out = std::ofstream(path, std::ios::binary);
    out << content;
}

fs::path scratch_dir(const std::string& name)
{
    auto dir = fs::temp_directory_path() / ("orchestra-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<TQATask> smoke_tasks()
{
    return load_dataset(ORCHESTRA_SMOKE_DATA, DatasetKind::unified_jsonl);
}

BenchResources bench_resources(Backend& backend)
{
    auto base = scripted_resources(backend);
    return BenchResources {base.backends, base.llm, ExemplarLibrary {}, base.tools};
}

} // namespace

TEST_SUITE("bench")
{
    TEST_CASE("unified jsonl")
    {
        auto tasks = parse_unified_jsonl(
            R"({"id":"a","question":"q?","gold":"4","table":{"columns":["x","y"],"rows":[[1,2.5],[null,true]]}})"
            "\n\n"
            R"({"id":"b","question":"s","gold":["yes"],"family":"tabfact","table":{"columns":["x"],"rows":[]}})");
        REQUIRE(tasks.size() == 2);
        CHECK(tasks[0].gold_answers == std::vector<std::string> {"4"});
        CHECK(tasks[0].table.rows() == std::vector<Row> {{"1", "2.5"}, {"", "true"}});
        CHECK(tasks[0].answer_format_hint == kShortAnswerHint);
        CHECK(tasks[1].family == "tabfact");
        CHECK(tasks[1].answer_format_hint == kYesNoAnswerHint);

        try
        {
            parse_unified_jsonl("{\"id\":\"a\",\"question\":\"q\",\"gold\":[\"x\"],\"table\":{\"columns\":[\"a\"],\"rows\":[]}}\n{\"id\":\"b\"}");
            FAIL("expected FormatError");
        }
        catch (const FormatError& e)
        {
            CHECK(std::string(e.what()).starts_with("line 2:"));
        }
        CHECK_THROWS_AS(parse_unified_jsonl("not json"), FormatError);
    }

    TEST_CASE("unified jsonl round trip")
    {
        auto tasks = smoke_tasks();
        REQUIRE(tasks.size() == 20);
        auto out = std::ostringstream {};
        write_unified_jsonl(tasks, out);
        auto back = parse_unified_jsonl(out.str());
        REQUIRE(back.size() == tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i)
        {
            CHECK(back[i].id == tasks[i].id);
            CHECK(back[i].table == tasks[i].table);
            CHECK(back[i].question == tasks[i].question);
            CHECK(back[i].gold_answers == tasks[i].gold_answers);
            CHECK(back[i].answer_format_hint == tasks[i].answer_format_hint);
            CHECK(back[i].family == tasks[i].family);
        }
    }

    TEST_CASE("wikitq layout")
    {
        auto dir = scratch_dir("wikitq");
        write_file(dir / "csv" / "204-csv" / "1.csv", "Nation,Gold\nNorway,11\nCanada,14\n");
        write_file(dir / "data" / "pristine-unseen-tables.tsv",
                   "id\tutterance\tcontext\ttargetValue\n"
                   "nu-0\twhich nation won the most gold?\tcsv/204-csv/1.csv\tCanada\n"
                   "nu-1\tlist both\tcsv/204-csv/1.csv\tNorway\\pCanada\n");
        auto tasks = load_dataset(dir, DatasetKind::wikitq);
        REQUIRE(tasks.size() == 2);
        CHECK(tasks[0].id == "nu-0");
        CHECK(tasks[0].table.rows().size() == 2);
        CHECK(tasks[1].gold_answers == std::vector<std::string> {"Norway|Canada"});
        CHECK(tasks[1].family == "wikitq");
        CHECK(load_dataset(dir / "data" / "pristine-unseen-tables.tsv", DatasetKind::wikitq).size() == 2);
        CHECK_THROWS_AS(parse_wikitq_tsv("x\ty\n", dir), FormatError);
        fs::remove_all(dir);
    }

    TEST_CASE("tabfact layout")
    {
        auto dir = scratch_dir("tabfact");
        write_file(dir / "data" / "all_csv" / "t1.csv", "team#wins\nfalcon#3\nkite#1\n");
        write_file(dir / "tokenized_data" / "test_examples.json",
                   R"({"t1.csv": [["falcon has more wins", "kite has 5 wins"], [1, 0], "league"]})");
        auto tasks = load_dataset(dir, DatasetKind::tabfact);
        REQUIRE(tasks.size() == 2);
        CHECK(tasks[0].id == "t1.csv-0");
        CHECK(tasks[0].gold_answers == std::vector<std::string> {"yes"});
        CHECK(tasks[1].gold_answers == std::vector<std::string> {"no"});
        CHECK(tasks[0].table.columns() == std::vector<std::string> {"team", "wins"});
        CHECK(tasks[0].answer_format_hint == kYesNoAnswerHint);
        CHECK_THROWS_AS(parse_tabfact_json(R"({"t1.csv": [["s"], [2], ""]})", dir / "data" / "all_csv"), FormatError);
        fs::remove_all(dir);
    }

    TEST_CASE("tablebench lines")
    {
        auto tasks = parse_tablebench_jsonl(
            R"({"id":"tb1","question":"q","answer":"7","table":"{\"columns\":[\"a\"],\"data\":[[7]]}"})" "\n"
            R"({"id":"tb2","question":"q","answer":"x","table":{"columns":["a"],"data":[["x"]]}})");
        REQUIRE(tasks.size() == 2);
        CHECK(tasks[0].table.rows() == std::vector<Row> {{"7"}});
        CHECK(tasks[1].family == "tablebench");
        CHECK(parse_dataset_kind("unified") == DatasetKind::unified_jsonl);
        CHECK(to_string(DatasetKind::tabfact) == "tabfact");
        CHECK_THROWS_AS(parse_dataset_kind("spider"), FormatError);
    }

    TEST_CASE("chain of thought baseline is one full-table request")
    {
        auto many = std::vector<Row> {};
        for (int i = 0; i < 45; ++i)
            many.push_back({std::to_string(i)});
        auto task = ship_task();
        task.table = Table("DF", {"n"}, many);
        auto prompt = build_cot_prompt(task);
        REQUIRE(prompt.size() == 2);
        CHECK(prompt[1].content.find("| 44 |") != std::string::npos);
        CHECK(prompt[1].content.find("rows total") == std::string::npos);
        CHECK(prompt[0].content.ends_with(std::string(kShortAnswerHint)));

        auto scripted = ScriptedBackend({{"| 44 |", "Looking at it.\nANSWER: 44"}});
        auto session = AgentSession(RoleBackends(scripted), LlmSettings {});
        CHECK(baseline_cot(task, EpisodeConfig {}, session) == "44");
        CHECK(session.usage().requests == 1);
    }

    TEST_CASE("react baseline keeps one growing conversation")
    {
        auto scripted = ScriptedBackend({{kShipQuestion, "Filter first.\n```sql\nSELECT name FROM DF WHERE port = 'Auckland'\n```"},
                                         {"OBSERVATION:\n| name |\n| --- |\n| Waitangi |", "Nothing runnable here."},
                                         {"neither a program nor an answer", "ANSWER: Kestrel"}});
        auto recorder = RecordingBackend(scripted);
        auto resources = scripted_resources(recorder);
        auto session = AgentSession(resources.backends, resources.llm);
        auto outcome = baseline_react(ship_task(), EpisodeConfig {}, resources, session);
        CHECK(outcome.prediction == "Kestrel");
        CHECK(outcome.trace.rounds.size() == 1);
        CHECK(outcome.trace.terminated_by == TerminationReason::answer);
        auto requests = recorder.requests();
        REQUIRE(requests.size() == 3);
        // The second request carries the first reply verbatim.
        CHECK(requests[1].messages[requests[1].messages.size() - 2].content.find("SELECT name FROM DF") != std::string::npos);
        CHECK(requests[2].messages.size() == requests[1].messages.size() + 2);
    }

    TEST_CASE("react baseline hits the round cap")
    {
        auto always = CallbackBackend([](const ChatRequest& request) -> std::string {
            if (request.messages.back().content == kForcedAnswerPrompt)
                return "ANSWER: Toroa";
            return "```sql\nSELECT * FROM DF\n```";
        });
        auto resources = scripted_resources(always);
        auto session = AgentSession(resources.backends, resources.llm);
        auto cfg = EpisodeConfig {};
        cfg.max_rounds = 2;
        auto outcome = baseline_react(ship_task(), cfg, resources, session);
        CHECK(outcome.prediction == "Toroa");
        CHECK(outcome.trace.terminated_by == TerminationReason::forced);
        CHECK(session.usage().requests == 3);
    }

    TEST_CASE("benchmark accuracy and cost means")
    {
        auto tasks = smoke_tasks();
        auto gold = std::map<std::string, std::string> {};
        for (std::size_t i = 0; i < tasks.size(); ++i)
            gold[tasks[i].question] = i < 15 ? tasks[i].gold_answers.front() : "certainly wrong";
        auto backend = CallbackBackend([&](const ChatRequest& request) {
            for (const auto& [question, answer]: gold)
                if (request.messages.back().content.ends_with("QUESTION: " + question))
                    return "ANSWER: " + answer;
            return std::string("ANSWER: ?");
        });
        auto resources = bench_resources(backend);
        auto options = BenchOptions {BenchMode::cot, EpisodeConfig {}, 3, std::nullopt};
        auto report = run_benchmark(tasks, options, resources);
        CHECK(report.task_count == 20);
        CHECK(report.correct_count == 15);
        CHECK(report.accuracy == doctest::Approx(0.75));
        CHECK(report.cost.mean_requests == doctest::Approx(1.0));

        // Token means recomputed from the prompts themselves.
        double input = 0, output = 0;
        for (std::size_t i = 0; i < tasks.size(); ++i)
        {
            auto request = ChatRequest {};
            request.messages = build_cot_prompt(tasks[i]);
            input += static_cast<double>(synthetic_token_count(request.joined_content()));
            output += static_cast<double>(synthetic_token_count("ANSWER: " + gold[tasks[i].question]));
        }
        CHECK(report.cost.mean_input_tokens == doctest::Approx(input / 20));
        CHECK(report.cost.mean_output_tokens == doctest::Approx(output / 20));
        for (std::size_t i = 0; i < tasks.size(); ++i)
            CHECK(report.per_task[i].id == tasks[i].id);

        auto json = nlohmann::json::parse(report_to_json(report));
        CHECK(json["mode"] == "cot");
        CHECK(json["correct_count"] == 15);
        CHECK(json["per_task"].size() == 20);
        CHECK(json["trace_path"].is_null());
    }

    TEST_CASE("summaries from hand-made records")
    {
        auto a = TaskRecord {};
        a.correct = true;
        a.usage = UsageStats {.input_tokens = 100, .output_tokens = 10, .requests = 4, .wall_time_s = 9.0};
        a.elapsed_s = 2.0;
        auto b = TaskRecord {};
        b.usage = UsageStats {.input_tokens = 50, .output_tokens = 30, .requests = 2, .wall_time_s = 1.0};
        b.elapsed_s = 4.0;
        auto report = summarize("orchestra", {a, b});
        CHECK(report.accuracy == doctest::Approx(0.5));
        CHECK(report.cost.mean_requests == doctest::Approx(3.0));
        CHECK(report.cost.mean_input_tokens == doctest::Approx(75.0));
        CHECK(report.cost.mean_output_tokens == doctest::Approx(20.0));
        CHECK(report.cost.mean_time_s == doctest::Approx(3.0));
        CHECK(report.total_usage.requests == 6);
    }

    TEST_CASE("orchestra mode request counts")
    {
        auto scripted = ScriptedBackend(ship_transcript());
        auto resources = bench_resources(scripted);
        auto cfg = EpisodeConfig {};
        cfg.m_samples = 1;
        auto record = run_task(ship_task(), BenchOptions {BenchMode::orchestra, cfg, 1, std::nullopt}, resources);
        CHECK(record.correct);
        CHECK(record.usage.requests == 8);

        // Without the decision agent the preliminary answer is used and one request is saved.
        auto transcript = ship_transcript();
        transcript.pop_back();
        auto two = ScriptedBackend(transcript);
        auto two_resources = bench_resources(two);
        auto two_record = run_task(ship_task(), BenchOptions {BenchMode::two_agent, cfg, 1, std::nullopt}, two_resources);
        CHECK(two_record.correct);
        CHECK(two_record.usage.requests == 7);
    }

    TEST_CASE("task failures are recorded, not thrown")
    {
        auto scripted = ScriptedBackend({{"", "REASONING: r\nINSTRUCTION: i"}, {"", "```python\npass\n```"}});
        auto resources = bench_resources(scripted);
        resources.tools.sandbox_command = {"/nonexistent/sandbox"};
        auto cfg = EpisodeConfig {};
        cfg.m_samples = 1;
        auto record = run_task(ship_task(), BenchOptions {BenchMode::orchestra, cfg, 1, std::nullopt}, resources);
        REQUIRE(record.error.has_value());
        CHECK(record.error->find("sandbox") != std::string::npos);
        CHECK_FALSE(record.correct);
        CHECK(record.prediction.empty());
    }

    TEST_CASE("baseline traces and modes")
    {
        auto path = fs::temp_directory_path() / "orchestra-test-react.jsonl";
        {
            auto scripted = ScriptedBackend({{"", "ANSWER: Kestrel"}});
            auto resources = bench_resources(scripted);
            auto writer = TraceWriter(path);
            auto record = run_task(ship_task(), BenchOptions {BenchMode::react, EpisodeConfig {}, 1, std::nullopt},
                                   resources, &writer);
            CHECK(record.correct);
            CHECK(record.usage.requests == 1);
        }
        auto in = std::ifstream(path);
        auto line = std::string {};
        REQUIRE(std::getline(in, line));
        CHECK(nlohmann::json::parse(line)["candidate"]["text"] == "Kestrel");
        fs::remove(path);

        CHECK(parse_bench_mode("Two-Agent") == BenchMode::two_agent);
        CHECK(to_string(BenchMode::two_agent) == "two-agent");
        CHECK_THROWS_AS(parse_bench_mode("solo"), ContractViolation);
        CHECK_THROWS_AS(run_benchmark({}, BenchOptions {}, BenchResources {}), ContractViolation);
    }
}
