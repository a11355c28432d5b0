// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"
#include "stochastic.hpp"

#include <orchestra/error.hpp>
#include <orchestra/orchestrator.hpp>
#include <orchestra/scripted_backend.hpp>
#include <orchestra/trace_io.hpp>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace orchestra;
using namespace orchestra::testing;

namespace
{

std::vector<CandidateAnswer> candidates(const std::vector<std::string>& texts)
{
    auto out = std::vector<CandidateAnswer> {};
    for (std::size_t i = 0; i < texts.size(); ++i)
        out.push_back(make_candidate(texts[i], static_cast<int>(i)));
    return out;
}

// Logic agent keeps asking, query agent keeps selecting everything.
CallbackBackend endless_backend()
{
    return CallbackBackend([](const ChatRequest& request) -> std::string {
        switch (classify_prompt(request))
        {
            case PromptRole::logic:
                if (request.messages.back().content == kForcedAnswerPrompt)
                    return "Toroa";
                return "REASONING: more evidence is needed\nINSTRUCTION: show every row";
            case PromptRole::query: return "```sql\nSELECT * FROM DF\n```";
            case PromptRole::decision: return "ANSWER: Toroa";
            case PromptRole::other: break;
        }
        return "";
    });
}

EpisodeConfig single_sample()
{
    auto cfg = EpisodeConfig {};
    cfg.m_samples = 1;
    return cfg;
}

} // namespace

TEST_SUITE("orchestrator")
{
    TEST_CASE("config validation")
    {
        auto cfg = EpisodeConfig {};
        CHECK_NOTHROW(cfg.validate());
        CHECK(cfg.max_rounds == 5);
        CHECK(cfg.m_samples == 5);
        CHECK(cfg.temperature == doctest::Approx(0.7));
        cfg.m_samples = 0;
        CHECK_THROWS_AS(cfg.validate(), ContractViolation);
        cfg = EpisodeConfig {};
        cfg.max_rounds = 0;
        CHECK_THROWS_AS(cfg.validate(), ContractViolation);
        CHECK_THROWS_AS(static_cast<void>(RoleBackends {}.for_role(AgentRole::logic)), ContractViolation);
    }

    TEST_CASE("aggregation examples")
    {
        auto a = aggregate_majority(candidates({"Kestrel", "kestrel.", "Toroa"}));
        CHECK(a.text == "Kestrel");
        CHECK(a.winner_count == 2);
        CHECK(a.vote_counts == std::map<std::string, int> {{"kestrel", 2}, {"toroa", 1}});

        CHECK(aggregate_majority(candidates({"B", "A"})).text == "B");
        CHECK(aggregate_majority(candidates({"B", "A", "A", "B"})).text == "B");
        CHECK(aggregate_majority(candidates({"", " ", "x"})).text == "x");
        CHECK(aggregate_majority(candidates({"", " ", "x"})).vote_counts.size() == 1);
        auto blank = aggregate_majority(candidates({"", "  "}));
        CHECK(blank.text == "");
        CHECK(blank.winner_count == 2);
        CHECK(aggregate_majority(candidates({"1,000", "1000", "999"})).text == "1,000");
        CHECK_THROWS_AS(aggregate_majority({}), ContractViolation);

        // Ties use the sample index, not the position in the list.
        auto shuffled = std::vector<CandidateAnswer> {make_candidate("late", 4), make_candidate("early", 1)};
        CHECK(aggregate_majority(shuffled).text == "early");
    }

    TEST_CASE("aggregation ignores candidate order")
    {
        auto rng = std::mt19937_64(41);
        const std::vector<std::string> pool = {"A", "a", "B", "b.", "", "C"};
        for (int trial = 0; trial < 200; ++trial)
        {
            auto n = std::uniform_int_distribution<int>(1, 7)(rng);
            auto texts = std::vector<std::string> {};
            for (int i = 0; i < n; ++i)
                texts.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
            auto list = candidates(texts);
            auto expected = aggregate_majority(list);
            for (int p = 0; p < 5; ++p)
            {
                std::shuffle(list.begin(), list.end(), rng);
                auto got = aggregate_majority(list);
                CHECK(got.text == expected.text);
                CHECK(got.vote_counts == expected.vote_counts);
            }
        }
    }

    TEST_CASE("majority formula against closed forms")
    {
        for (double p: {0.3, 0.55, 0.8})
        {
            CHECK(majority_accuracy(1, p) == doctest::Approx(p));
            CHECK(majority_accuracy(2, p) == doctest::Approx(p));
            CHECK(majority_accuracy(3, p) == doctest::Approx(p * p * p + 3 * p * p * (1 - p)));
        }
    }

    TEST_CASE("Monte Carlo accuracy follows the binomial majority")
    {
        const double p = 0.6;
        const int trials = 400;
        for (int m: {1, 3, 7})
        {
            double expected = majority_accuracy(m, p);
            double sigma = std::sqrt(expected * (1 - expected) / trials);
            double observed = simulate_accuracy(m, p, trials, 1000 * m);
            CAPTURE(m);
            CHECK(std::abs(observed - expected) <= 2.576 * sigma);
        }
    }

    TEST_CASE("fixed seeds give identical runs regardless of concurrency")
    {
        auto backend = CoinBackend(0.5);
        auto task = ship_task();
        auto resources = scripted_resources(backend);
        auto cfg = EpisodeConfig {};
        cfg.m_samples = 6;
        cfg.seed_base = 77;
        auto first = run_orchestra(task, cfg, resources);
        cfg.concurrency = 3;
        auto second = run_orchestra(task, cfg, resources);
        CHECK(first.answer.text == second.answer.text);
        CHECK(first.answer.vote_counts == second.answer.vote_counts);
        CHECK(first.usage.requests == second.usage.requests);
        CHECK(first.usage.input_tokens == second.usage.input_tokens);
        for (int i = 0; i < 6; ++i)
            CHECK(first.samples[static_cast<std::size_t>(i)].candidate.text
                  == (backend.draw(77 + i) ? "A" : "B"));
    }

    TEST_CASE("worked example replay")
    {
        auto scripted = ScriptedBackend(ship_transcript());
        auto resources = scripted_resources(scripted);
        auto task = ship_task();
        auto result = run_orchestra(task, single_sample(), resources);
        CHECK(result.answer.text == fastest_auckland_ship(task.table));
        CHECK(scripted.remaining() == 0);
        const auto& trace = result.samples.at(0).trace;
        REQUIRE(trace.rounds.size() == 3);
        CHECK(trace.terminated_by == TerminationReason::answer);
        CHECK(trace.preliminary_answer == "Kestrel");
        CHECK(trace.rounds[0].observation.row_count() == 2);
        CHECK(trace.rounds[1].observation.columns().back() == "speed");
        CHECK(trace.rounds[2].observation.rows() == std::vector<Row> {{"Kestrel", "12.5"}});
        CHECK(result.usage.requests == 8);
    }

    TEST_CASE("round cap forces an answer")
    {
        for (int cap = 1; cap <= 5; ++cap)
        {
            auto callback = endless_backend();
            auto recorder = RecordingBackend(callback);
            auto resources = scripted_resources(recorder);
            auto cfg = single_sample();
            cfg.max_rounds = cap;
            auto session = AgentSession(resources.backends, resources.llm);
            auto trace = run_episode(ship_task(), cfg, resources, session);
            CHECK(trace.rounds.size() == static_cast<std::size_t>(cap));
            CHECK(trace.terminated_by == TerminationReason::forced);
            CHECK(trace.preliminary_answer == "Toroa");
            auto requests = recorder.requests();
            CHECK(requests.size() == static_cast<std::size_t>(2 * cap + 1));
            CHECK(requests.back().messages.back() == ChatMessage::user(std::string(kForcedAnswerPrompt)));
            CHECK(session.usage().requests == 2 * cap + 1);
        }
    }

    TEST_CASE("empty forced reply leaves no preliminary answer")
    {
        auto backend = CallbackBackend([](const ChatRequest& request) -> std::string {
            if (classify_prompt(request) == PromptRole::query)
                return "```sql\nSELECT name FROM DF\n```";
            if (request.messages.back().content == kForcedAnswerPrompt)
                return "   ";
            return "REASONING: r\nINSTRUCTION: i";
        });
        auto resources = scripted_resources(backend);
        auto cfg = single_sample();
        cfg.max_rounds = 1;
        auto session = AgentSession(resources.backends, resources.llm);
        auto trace = run_episode(ship_task(), cfg, resources, session);
        CHECK_FALSE(trace.preliminary_answer.has_value());
        CHECK(decide(trace, ship_task(), [] {
                  auto c = single_sample();
                  c.decision_agent_enabled = false;
                  return c;
              }(), session).text == "");
    }

    TEST_CASE("malformed logic replies are re-prompted once")
    {
        auto scripted = ScriptedBackend({{kShipQuestion, "I am not sure."}, {"did not follow the required format", "still no markers"}});
        auto recorder = RecordingBackend(scripted);
        auto resources = scripted_resources(recorder);
        auto session = AgentSession(resources.backends, resources.llm);
        auto trace = run_episode(ship_task(), single_sample(), resources, session);
        CHECK(trace.terminated_by == TerminationReason::parse_failure);
        CHECK(trace.rounds.empty());
        auto requests = recorder.requests();
        REQUIRE(requests.size() == 2);
        const auto& retry = requests[1].messages;
        CHECK(retry[retry.size() - 2] == ChatMessage::assistant("I am not sure."));
        CHECK(retry.back().content == kLogicFormatReminder);
    }

    TEST_CASE("a query agent without a program yields an error observation")
    {
        auto scripted = ScriptedBackend({{kShipQuestion, "REASONING: r\nINSTRUCTION: list ports"},
                                         {"INSTRUCTION: list ports", "I would look at the port column."},
                                         {"did not contain a program", "Still prose."},
                                         {"no executable program", "ANSWER: unknown"}});
        auto resources = scripted_resources(scripted);
        auto session = AgentSession(resources.backends, resources.llm);
        auto trace = run_episode(ship_task(), single_sample(), resources, session);
        REQUIRE(trace.rounds.size() == 1);
        CHECK_FALSE(trace.rounds[0].ok);
        CHECK_FALSE(trace.rounds[0].program.has_value());
        CHECK(trace.rounds[0].observation == error_table("no executable program in the query agent's reply"));
        CHECK(trace.preliminary_answer == "unknown");
    }

    TEST_CASE("failed programs do not replace the working table")
    {
        auto scripted = ScriptedBackend({{kShipQuestion, "REASONING: r\nINSTRUCTION: one"},
                                         {"", "```sql\nSELECT nope FROM DF\n```"},
                                         {"no such column: nope", "REASONING: r2\nINSTRUCTION: two"},
                                         {"TABLE DF (columns: name, dates, port, propulsion, notes)", "```sql\nSELECT name FROM DF LIMIT 1\n```"},
                                         {"", "ANSWER: Waitangi"}});
        auto resources = scripted_resources(scripted);
        auto session = AgentSession(resources.backends, resources.llm);
        auto trace = run_episode(ship_task(), single_sample(), resources, session);
        REQUIRE(trace.rounds.size() == 2);
        CHECK_FALSE(trace.rounds[0].ok);
        CHECK(trace.rounds[1].ok);
        CHECK(trace.preliminary_answer == "Waitangi");
    }

    TEST_CASE("decision fallbacks and draws")
    {
        auto trace = EpisodeTrace {};
        trace.preliminary_answer = "prelim";
        auto task = ship_task();

        auto blank = ScriptedBackend({{"QUESTION:", "   "}});
        auto blank_session = AgentSession(RoleBackends(blank), LlmSettings {});
        CHECK(decide(trace, task, single_sample(), blank_session).text == "prelim");

        auto no_prelim = ScriptedBackend({{"", ""}});
        auto no_prelim_session = AgentSession(RoleBackends(no_prelim), LlmSettings {});
        CHECK(decide(EpisodeTrace {}, task, single_sample(), no_prelim_session).text == "");

        auto unused = ScriptedBackend({{"", "ANSWER: never"}});
        auto unused_session = AgentSession(RoleBackends(unused), LlmSettings {});
        auto disabled = single_sample();
        disabled.decision_agent_enabled = false;
        CHECK(decide(trace, task, disabled, unused_session, 3).text == "prelim");
        CHECK(decide(trace, task, disabled, unused_session, 3).sample_index == 3);
        CHECK(unused.consumed() == 0);

        auto three = ScriptedBackend({{"", "ANSWER: x"}, {"", "ANSWER: y"}, {"", "ANSWER: Y."}});
        auto three_session = AgentSession(RoleBackends(three), LlmSettings {});
        auto draws = single_sample();
        draws.decision_draws = 3;
        CHECK(decide(trace, task, draws, three_session).text == "y");
        CHECK(three_session.usage().requests == 3);
    }

    TEST_CASE("decision prompt sees no code")
    {
        auto trace = EpisodeTrace {};
        trace.rounds.push_back({"because", "filter", ToolProgram(ToolProgram::Kind::sql, "SELECT secret FROM DF"),
                                Table("r", {"a"}, {{"1"}}), true});
        auto prompt = build_decision_prompt(trace, kShipQuestion, ship_fixture(), "HINT");
        REQUIRE(prompt.size() == 2);
        CHECK(prompt[0].content.ends_with("HINT"));
        CHECK(prompt[1].content.find("SELECT secret") == std::string::npos);
        CHECK(prompt[1].content.find("STEP 1\nREASONING: because\nINSTRUCTION: filter\nOBSERVATION:\n| a |")
              != std::string::npos);
        auto refined = refine_trace(trace, ship_task());
        CHECK(refined.steps.size() == 1);
        CHECK(refined.initial_table == ship_fixture());
    }

    TEST_CASE("backend failures drop one sample, not the run")
    {
        auto backend = CallbackBackend([](const ChatRequest& request) -> std::string {
            if (request.seed == 101)
                throw ApiError(400, "bad request");
            return "ANSWER: Kestrel";
        });
        auto resources = scripted_resources(backend);
        auto cfg = EpisodeConfig {};
        cfg.m_samples = 3;
        cfg.seed_base = 100;
        auto result = run_orchestra(ship_task(), cfg, resources);
        CHECK(result.answer.text == "Kestrel");
        CHECK(result.samples[1].trace.terminated_by == TerminationReason::backend_error);
        CHECK(result.samples[1].trace.error.find("bad request") != std::string::npos);
        CHECK(result.samples[1].candidate.text == "");
        CHECK(result.answer.winner_count == 2);
        // 2 requests for each good sample, 1 failed request.
        CHECK(result.usage.requests == 5);
    }

    TEST_CASE("a missing sandbox aborts the run")
    {
        auto scripted = ScriptedBackend({{"", "REASONING: r\nINSTRUCTION: i"}, {"", "```python\npass\n```"}});
        auto resources = scripted_resources(scripted);
        resources.tools.sandbox_command = {"/nonexistent/sandbox"};
        CHECK_THROWS_AS(run_orchestra(ship_task(), single_sample(), resources), SandboxUnavailableError);
    }

    TEST_CASE("trace records")
    {
        auto path = std::filesystem::temp_directory_path() / "orchestra-test-traces.jsonl";
        {
            auto writer = TraceWriter(path);
            auto scripted = ScriptedBackend(ship_transcript());
            auto resources = scripted_resources(scripted);
            run_orchestra(ship_task(), single_sample(), resources, &writer);
        }
        auto in = std::ifstream(path);
        auto lines = std::vector<std::string> {};
        for (std::string line; std::getline(in, line);)
            lines.push_back(line);
        REQUIRE(lines.size() == 1);
        auto record = nlohmann::json::parse(lines[0]);
        CHECK(record["task_id"] == "ships");
        CHECK(record["sample_index"] == 0);
        CHECK(record["trace"]["terminated_by"] == "answer");
        CHECK(record["trace"]["rounds"].size() == 3);
        CHECK(record["trace"]["rounds"][1]["program"]["kind"] == "script");
        CHECK(record["candidate"]["normalized"] == "kestrel");
        CHECK(record["usage"]["requests"] == 8);
        std::filesystem::remove(path);
        CHECK_THROWS_AS(TraceWriter("/nonexistent-dir/x.jsonl"), Error);
    }
}
