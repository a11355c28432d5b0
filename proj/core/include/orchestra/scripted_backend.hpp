// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/llm.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <initializer_list>
#include <vector>

namespace orchestra
{

/// ceil(characters / 4), counting UTF-8 code points.
std::int64_t synthetic_token_count(std::string_view text);

/// Failure a scripted entry raises instead of replying.
enum class ScriptedFault
{
    none,
    transport,
    timeout,
    api,
};

struct ScriptEntry
{
    /// Substring that must occur in the concatenated message contents.
    /// Empty matches any request.
    std::string matcher;
    std::string reply;
    ScriptedFault fault = ScriptedFault::none;
};

/// Deterministic test double: each call consumes the next transcript entry.
/// A matcher that rejects the request raises ScriptMismatchError without
/// consuming the entry, which surfaces prompt drift in tests.
class ScriptedBackend: public Backend
{
  public:
    explicit ScriptedBackend(std::vector<ScriptEntry> transcript);
    ScriptedBackend(std::initializer_list<ScriptEntry> transcript): ScriptedBackend(std::vector<ScriptEntry>(transcript)) {}

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] std::size_t consumed() const;
    [[nodiscard]] std::size_t remaining() const;

  private:
    mutable std::mutex _mutex;
    std::vector<ScriptEntry> _transcript;
    std::size_t _cursor = 0;
};

/// Reads a JSON transcript: `[{"match": "...", "reply": "..."}, ...]`.
/// A `"fault"` key ("transport", "timeout", "api") makes the entry fail.
std::vector<ScriptEntry> load_script_file(const std::string& path);

/// Replies computed from the request by a user function, with the same
/// synthetic usage as ScriptedBackend. Thread safety is the function's.
class CallbackBackend: public Backend
{
  public:
    using Responder = std::function<std::string(const ChatRequest&)>;

    explicit CallbackBackend(Responder responder): _responder(std::move(responder)) {}

    ChatResponse complete(const ChatRequest& request) override;

  private:
    Responder _responder;
};

} // namespace orchestra
