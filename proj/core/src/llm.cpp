// SPDX-License-Identifier: Apache-2.0
#include <orchestra/llm.hpp>

namespace orchestra
{

std::string_view to_string(Role role)
{
    switch (role)
    {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role parse_role(std::string_view text)
{
    if (text == "system")
        return Role::system;
    if (text == "user")
        return Role::user;
    if (text == "assistant")
        return Role::assistant;
    throw FormatError("unknown chat role: " + std::string(text));
}

void ChatRequest::validate() const
{
    if (messages.empty())
        throw ContractViolation("chat request has no messages");
    for (const auto& message: messages)
        if (message.role != Role::system && message.content.empty())
            throw ContractViolation("user/assistant chat message with empty content");
    if (!(temperature >= 0.0 && temperature <= 2.0))
        throw ContractViolation("temperature must lie in [0, 2]");
    if (max_tokens <= 0)
        throw ContractViolation("max_tokens must be positive");
}

std::string ChatRequest::joined_content() const
{
    auto out = std::string {};
    for (const auto& message: messages)
        out += message.content;
    return out;
}

void UsageLedger::record(const UsageStats& usage)
{
    auto lock = std::lock_guard(_mutex);
    _total += usage;
}

UsageStats UsageLedger::total() const
{
    auto lock = std::lock_guard(_mutex);
    return _total;
}

void UsageLedger::reset()
{
    auto lock = std::lock_guard(_mutex);
    _total = {};
}

ChatResponse complete_chat(Backend& backend, const ChatRequest& request, UsageLedger& ledger)
{
    request.validate();
    auto started = std::chrono::steady_clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };
    try
    {
        auto response = backend.complete(request);
        response.usage.requests = 1;
        response.usage.wall_time_s = elapsed();
        ledger.record(response.usage);
        return response;
    }
    catch (...)
    {
        ledger.record(UsageStats {.requests = 1, .wall_time_s = elapsed()});
        throw;
    }
}

ChatResponse ChatClient::chat(std::vector<ChatMessage> messages, double temperature, std::optional<std::int64_t> seed)
{
    auto request = ChatRequest {
        .model = _settings.model,
        .messages = std::move(messages),
        .temperature = temperature,
        .max_tokens = _settings.max_tokens,
        .seed = seed,
    };
    return with_retries([&] { return complete_chat(*_backend, request, _ledger); }, _settings.retry);
}

} // namespace orchestra
