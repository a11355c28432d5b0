// SPDX-License-Identifier: Apache-2.0
#include "fixtures.hpp"

#include <regex>
#include <stdexcept>

namespace orchestra::testing
{

Table ship_fixture()
{
    return Table("DF", {"name", "dates", "port", "propulsion", "notes"},
                 {
                     {"Waitangi", "1906-1932", "Auckland", "320 bhp diesel, 10 knots (19 km/h)", "coastal"},
                     {"Kestrel", "1905-1955", "Auckland", "triple expansion, 12.5 knots (23 km/h)", "ferry"},
                     {"Toroa", "1925-1961", "Wellington", "triple expansion, 14 knots (26 km/h)", "harbour"},
                     {"Ngahue", "1911-1938", "Lyttelton", "compound engine, 9 knots (17 km/h)", "tender"},
                 });
}

TQATask ship_task()
{
    auto task = TQATask {};
    task.id = "ships";
    task.table = ship_fixture();
    task.question = kShipQuestion;
    task.gold_answers = {"Kestrel"};
    return task;
}

std::string fastest_auckland_ship(const Table& ships)
{
    const auto speed_pattern = std::regex(",(.*?) knots");
    std::string best;
    double best_speed = -1.0;
    for (const auto& row: ships.rows())
    {
        if (row[2] != "Auckland")
            continue;
        std::smatch m;
        if (!std::regex_search(row[3], m, speed_pattern))
            continue;
        double speed = std::stod(m[1].str());
        if (speed > best_speed)
        {
            best_speed = speed;
            best = row[0];
        }
    }
    return best;
}

std::vector<std::string> ship_programs()
{
    return {
        "SELECT name, propulsion FROM DF WHERE port='Auckland';",
        "df['speed'] = df['propulsion'].str.extract(r',(.*?) knots', expand=False).str.strip()",
        "SELECT name, speed FROM DF ORDER BY CAST(speed AS REAL) DESC LIMIT 1;",
    };
}

std::vector<ScriptEntry> ship_transcript()
{
    auto programs = ship_programs();
    return {
        {kShipQuestion,
         "REASONING: The question is about ships based in Auckland, so only their names and propulsion matter.\n"
         "INSTRUCTION: filter rows where port is Auckland, keep name and propulsion"},
        {"INSTRUCTION: filter rows where port is Auckland", "SQL:\n```sql\n" + programs[0] + "\n```"},
        {"| Waitangi | 320 bhp diesel, 10 knots (19 km/h) |",
         "REASONING: The speed is written inside the propulsion text, just before the word knots.\n"
         "INSTRUCTION: extract knots number from propulsion into a new column speed"},
        {"INSTRUCTION: extract knots number", "Python:\n```python\n" + programs[1] + "\n```"},
        {"| Kestrel | triple expansion, 12.5 knots (23 km/h) | 12.5 |",
         "REASONING: Both Auckland ships now carry a numeric speed.\n"
         "INSTRUCTION: sort by speed in descending order and keep the name of the fastest ship"},
        {"INSTRUCTION: sort by speed", "SQL:\n```sql\n" + programs[2] + "\n```"},
        {"| Kestrel | 12.5 |", "ANSWER: Kestrel"},
        {"STEP 3", "The sorted observation puts Kestrel first.\nANSWER: Kestrel"},
    };
}

std::string stub_sandbox_path()
{
    return ORCHESTRA_STUB_SANDBOX;
}

std::string bundled_prompts_dir()
{
    return ORCHESTRA_TEST_PROMPTS_DIR;
}

ToolSettings stub_tool_settings()
{
    auto settings = ToolSettings {};
    settings.sandbox_command = {stub_sandbox_path()};
    settings.sandbox_timeout = std::chrono::seconds(5);
    return settings;
}

OrchestraResources scripted_resources(Backend& backend, ExemplarSet exemplars)
{
    auto llm = LlmSettings {};
    llm.retry.initial_backoff = std::chrono::milliseconds(0);
    return OrchestraResources {RoleBackends(backend), llm, std::move(exemplars), stub_tool_settings()};
}

ChatResponse RecordingBackend::complete(const ChatRequest& request)
{
    {
        auto lock = std::lock_guard(_mutex);
        _requests.push_back(request);
    }
    return _inner->complete(request);
}

std::vector<ChatRequest> RecordingBackend::requests() const
{
    auto lock = std::lock_guard(_mutex);
    return _requests;
}

std::size_t RecordingBackend::size() const
{
    auto lock = std::lock_guard(_mutex);
    return _requests.size();
}

PromptRole classify_prompt(const ChatRequest& request)
{
    if (request.messages.empty() || request.messages.front().role != Role::system)
        return PromptRole::other;
    const auto& card = request.messages.front().content;
    if (card.starts_with("You are the logic agent"))
        return PromptRole::logic;
    if (card.starts_with("You are the query agent"))
        return PromptRole::query;
    if (card.starts_with("You answer a question about a table. Base the answer only"))
        return PromptRole::decision;
    return PromptRole::other;
}

} // namespace orchestra::testing
