// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/error.hpp>

#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace orchestra
{

enum class Role
{
    system,
    user,
    assistant,
};

std::string_view to_string(Role role);
Role parse_role(std::string_view text);

struct ChatMessage
{
    Role role = Role::user;
    std::string content;

    static ChatMessage system(std::string content) { return {Role::system, std::move(content)}; }
    static ChatMessage user(std::string content) { return {Role::user, std::move(content)}; }
    static ChatMessage assistant(std::string content) { return {Role::assistant, std::move(content)}; }

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest
{
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.7;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed;

    /// Throws ContractViolation on an empty message list, an empty user or
    /// assistant turn, temperature outside [0, 2] or non-positive max_tokens.
    void validate() const;

    /// Concatenation of all message contents, the text scripted backends match on.
    [[nodiscard]] std::string joined_content() const;
};

enum class FinishReason
{
    stop,
    length,
    other,
};

struct UsageStats
{
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t requests = 0;
    double wall_time_s = 0.0;

    UsageStats& operator+=(const UsageStats& other)
    {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        requests += other.requests;
        wall_time_s += other.wall_time_s;
        return *this;
    }

    friend UsageStats operator+(UsageStats lhs, const UsageStats& rhs) { return lhs += rhs; }
};

struct ChatResponse
{
    std::string content;
    UsageStats usage;
    FinishReason finish_reason = FinishReason::stop;
};

/// A chat-completion provider. Implementations must be callable from several
/// threads at once.
class Backend
{
  public:
    virtual ~Backend() = default;

    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Thread-safe running total of usage.
class UsageLedger
{
  public:
    void record(const UsageStats& usage);
    [[nodiscard]] UsageStats total() const;
    void reset();

  private:
    mutable std::mutex _mutex;
    UsageStats _total;
};

/// One request against `backend`. The ledger receives exactly one request
/// with the measured wall time, whether the call succeeds or throws.
ChatResponse complete_chat(Backend& backend, const ChatRequest& request, UsageLedger& ledger);

struct RetryPolicy
{
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff {500};
    double backoff_multiplier = 2.0;
};

/// Invokes `op` until it returns, retrying TransportError and TimeoutError
/// up to `policy.max_attempts` attempts in total. Other exceptions propagate
/// immediately; after exhaustion the last error is rethrown.
template<typename Op>
auto with_retries(Op&& op, const RetryPolicy& policy) -> decltype(op())
{
    if (policy.max_attempts < 1)
        throw ContractViolation("RetryPolicy::max_attempts must be >= 1");

    auto delay = std::chrono::duration<double, std::milli>(policy.initial_backoff);
    for (int attempt = 1;; ++attempt)
    {
        try
        {
            return op();
        }
        catch (const TransportError&)
        {
            if (attempt >= policy.max_attempts)
                throw;
        }
        catch (const TimeoutError&)
        {
            if (attempt >= policy.max_attempts)
                throw;
        }
        if (delay.count() > 0)
            std::this_thread::sleep_for(delay);
        delay *= policy.backoff_multiplier;
    }
}

struct LlmSettings
{
    std::string model = "default";
    int max_tokens = 1024;
    RetryPolicy retry;
};

/// Binds a backend, request defaults and a private usage ledger. One client
/// per episode keeps per-sample accounting independent of concurrency.
class ChatClient
{
  public:
    ChatClient(Backend& backend, LlmSettings settings): _backend(&backend), _settings(std::move(settings)) {}

    ChatResponse chat(std::vector<ChatMessage> messages, double temperature,
                      std::optional<std::int64_t> seed = std::nullopt);

    [[nodiscard]] UsageStats usage() const { return _ledger.total(); }
    [[nodiscard]] const LlmSettings& settings() const noexcept { return _settings; }

  private:
    Backend* _backend;
    LlmSettings _settings;
    UsageLedger _ledger;
};

} // namespace orchestra
