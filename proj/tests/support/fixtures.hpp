// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/orchestrator.hpp>
#include <orchestra/scripted_backend.hpp>
#include <orchestra/table.hpp>
#include <orchestra/task.hpp>

#include <mutex>
#include <string>
#include <vector>

namespace orchestra::testing
{

// Four ships, two of them based in Auckland.
Table ship_fixture();

inline constexpr const char* kShipQuestion = "Which ship based in Auckland has the highest speed?";

TQATask ship_task();

// Fastest Auckland ship computed directly from the fixture rows.
std::string fastest_auckland_ship(const Table& ships);

// Programs of the worked example, in round order.
std::vector<std::string> ship_programs();

// Logic -> query -> logic -> query -> logic -> query -> answer -> decision.
std::vector<ScriptEntry> ship_transcript();

// Resources routing every role to `backend`, no exemplars, stub sandbox.
OrchestraResources scripted_resources(Backend& backend, ExemplarSet exemplars = {});

ToolSettings stub_tool_settings();

// Path of the stub sandbox binary built next to the tests.
std::string stub_sandbox_path();

// Prompts directory bundled with the sources.
std::string bundled_prompts_dir();

// Captures every request before forwarding it.
class RecordingBackend: public Backend
{
  public:
    explicit RecordingBackend(Backend& inner): _inner(&inner) {}

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] std::vector<ChatRequest> requests() const;
    [[nodiscard]] std::size_t size() const;

  private:
    Backend* _inner;
    mutable std::mutex _mutex;
    std::vector<ChatRequest> _requests;
};

enum class PromptRole
{
    logic,
    query,
    decision,
    other,
};

// Classifies a request by the role card in its system message.
PromptRole classify_prompt(const ChatRequest& request);

} // namespace orchestra::testing
