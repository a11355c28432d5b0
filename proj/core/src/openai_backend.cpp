// SPDX-License-Identifier: Apache-2.0
#include <orchestra/openai_backend.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>

namespace orchestra
{

OpenAIBackendConfig OpenAIBackendConfig::from_environment(OpenAIBackendConfig defaults)
{
    if (const char* base = std::getenv(kApiBaseEnv); base != nullptr && *base != '\0')
        defaults.base_url = base;
    if (defaults.api_key.empty())
        if (const char* key = std::getenv(kApiKeyEnv); key != nullptr)
            defaults.api_key = key;
    return defaults;
}

OpenAIBackendConfig OpenAIBackendConfig::from_environment()
{
    return from_environment(OpenAIBackendConfig {});
}

std::string to_openai_json(const ChatRequest& request)
{
    auto body = nlohmann::ordered_json::object();
    body["model"] = request.model;
    auto messages = nlohmann::ordered_json::array();
    for (const auto& message: request.messages)
        messages.push_back({{"role", std::string(to_string(message.role))}, {"content", message.content}});
    body["messages"] = std::move(messages);
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    if (request.seed)
        body["seed"] = *request.seed;
    return body.dump();
}

ChatResponse parse_openai_response(std::string_view body)
{
    try
    {
        auto doc = nlohmann::json::parse(body);
        const auto& choice = doc.at("choices").at(0);
        auto response = ChatResponse {};
        const auto& content = choice.at("message").at("content");
        response.content = content.is_null() ? std::string {} : content.get<std::string>();

        auto reason = choice.value("finish_reason", nlohmann::json {});
        if (reason == "stop")
            response.finish_reason = FinishReason::stop;
        else if (reason == "length")
            response.finish_reason = FinishReason::length;
        else
            response.finish_reason = FinishReason::other;

        if (auto usage = doc.find("usage"); usage != doc.end() && usage->is_object())
        {
            response.usage.input_tokens = usage->value("prompt_tokens", std::int64_t {0});
            response.usage.output_tokens = usage->value("completion_tokens", std::int64_t {0});
        }
        return response;
    }
    catch (const nlohmann::json::exception& e)
    {
        throw BackendError(std::string("malformed chat-completions response: ") + e.what());
    }
}

OpenAIBackend::OpenAIBackend(OpenAIBackendConfig config): _config(std::move(config))
{
    auto url = std::string_view(_config.base_url);
    while (url.ends_with('/'))
        url.remove_suffix(1);

    auto scheme_end = url.find("://");
    if (scheme_end == std::string_view::npos)
        throw ContractViolation("endpoint URL needs a scheme: " + _config.base_url);
    auto path_start = url.find('/', scheme_end + 3);
    _origin = std::string(url.substr(0, path_start));
    auto prefix = path_start == std::string_view::npos ? std::string_view {} : url.substr(path_start);
    _path = std::string(prefix) + (prefix.ends_with("/v1") ? "/chat/completions" : "/v1/chat/completions");
}

ChatResponse OpenAIBackend::complete(const ChatRequest& request)
{
    auto client = httplib::Client(_origin);
    auto seconds = static_cast<time_t>(_config.timeout.count());
    client.set_connection_timeout(seconds, 0);
    client.set_read_timeout(seconds, 0);
    client.set_write_timeout(seconds, 0);
    if (!_config.api_key.empty())
        client.set_bearer_token_auth(_config.api_key);

    auto started = std::chrono::steady_clock::now();
    auto result = client.Post(_path, to_openai_json(request), "application/json");
    if (!result)
    {
        auto error = result.error();
        auto waited = std::chrono::steady_clock::now() - started;
        // httplib reports some immediate refusals as ConnectionTimeout, so elapsed time decides.
        bool timing = error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read;
        if (timing && waited >= _config.timeout * 9 / 10)
            throw TimeoutError("chat request to " + _origin + _path + " timed out");
        throw TransportError("chat request to " + _origin + _path + " failed: " + httplib::to_string(error));
    }
    if (result->status >= 500)
        throw TransportError("HTTP " + std::to_string(result->status) + " from " + _origin + _path + ": "
                             + result->body);
    if (result->status >= 400)
        throw ApiError(result->status, result->body);
    if (result->status < 200 || result->status >= 300)
        throw TransportError("unexpected HTTP status " + std::to_string(result->status));
    return parse_openai_response(result->body);
}

} // namespace orchestra
