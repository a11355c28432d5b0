// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/llm.hpp>

#include <chrono>
#include <string>
#include <string_view>

namespace orchestra
{

/// Environment variable consulted for the bearer token.
inline constexpr const char* kApiKeyEnv = "ORCHESTRA_API_KEY";
/// Environment variable consulted for the endpoint base URL.
inline constexpr const char* kApiBaseEnv = "ORCHESTRA_API_BASE";

struct OpenAIBackendConfig
{
    /// e.g. `http://localhost:8000/v1`. A base without a trailing `/v1`
    /// gets `/v1/chat/completions` appended.
    std::string base_url = "http://localhost:8000/v1";
    std::string api_key;
    std::chrono::seconds timeout {120};

    /// Fills unset fields from ORCHESTRA_API_BASE / ORCHESTRA_API_KEY.
    static OpenAIBackendConfig from_environment(OpenAIBackendConfig defaults);
    static OpenAIBackendConfig from_environment();
};

/// JSON body for POST /v1/chat/completions. Keys appear in the order
/// model, messages, temperature, max_tokens, seed (seed only when set).
std::string to_openai_json(const ChatRequest& request);

/// Extracts the first choice's content, finish reason and token usage.
/// Throws BackendError on a malformed body.
ChatResponse parse_openai_response(std::string_view body);

/// Chat backend speaking the OpenAI-compatible chat-completions protocol.
///
/// Status >= 500 and connection failures raise TransportError, 4xx raises
/// ApiError and an exceeded deadline raises TimeoutError. Each call opens
/// its own connection, so one instance can serve many threads.
class OpenAIBackend: public Backend
{
  public:
    explicit OpenAIBackend(OpenAIBackendConfig config);

    ChatResponse complete(const ChatRequest& request) override;

    [[nodiscard]] const std::string& endpoint_path() const noexcept { return _path; }

  private:
    OpenAIBackendConfig _config;
    std::string _origin;
    std::string _path;
};

} // namespace orchestra
