// SPDX-License-Identifier: Apache-2.0
#include <orchestra/scripted_backend.hpp>

#include "text_util.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace orchestra
{

std::int64_t synthetic_token_count(std::string_view text)
{
    auto chars = static_cast<std::int64_t>(text::utf8_length(text));
    return (chars + 3) / 4;
}

namespace
{

ChatResponse synthetic_response(const ChatRequest& request, std::string reply)
{
    auto response = ChatResponse {};
    response.usage.input_tokens = synthetic_token_count(request.joined_content());
    response.usage.output_tokens = synthetic_token_count(reply);
    response.content = std::move(reply);
    return response;
}

std::string excerpt(std::string_view s, std::size_t limit = 160)
{
    if (s.size() <= limit)
        return std::string(s);
    return std::string(s.substr(0, limit)) + "...";
}

} // namespace

ScriptedBackend::ScriptedBackend(std::vector<ScriptEntry> transcript): _transcript(std::move(transcript))
{
    if (_transcript.empty())
        throw ContractViolation("scripted backend needs a non-empty transcript");
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request)
{
    auto lock = std::lock_guard(_mutex);
    if (_cursor >= _transcript.size())
        throw ScriptExhaustedError("scripted backend exhausted after " + std::to_string(_transcript.size())
                                   + " replies");

    const auto& entry = _transcript[_cursor];
    auto joined = request.joined_content();
    if (!entry.matcher.empty() && joined.find(entry.matcher) == std::string::npos)
        throw ScriptMismatchError("script entry " + std::to_string(_cursor) + " expects \"" + entry.matcher
                                  + "\" in request starting: " + excerpt(joined));
    ++_cursor;

    switch (entry.fault)
    {
        case ScriptedFault::none: break;
        case ScriptedFault::transport: throw TransportError("scripted transport failure");
        case ScriptedFault::timeout: throw TimeoutError("scripted timeout");
        case ScriptedFault::api: throw ApiError(400, "scripted API error");
    }
    return synthetic_response(request, entry.reply);
}

std::size_t ScriptedBackend::consumed() const
{
    auto lock = std::lock_guard(_mutex);
    return _cursor;
}

std::size_t ScriptedBackend::remaining() const
{
    auto lock = std::lock_guard(_mutex);
    return _transcript.size() - _cursor;
}

std::vector<ScriptEntry> load_script_file(const std::string& path)
{
    auto in = std::ifstream(path);
    if (!in)
        throw FormatError("cannot open script file: " + path);
    auto doc = nlohmann::json {};
    try
    {
        doc = nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw FormatError("invalid script JSON in " + path + ": " + e.what());
    }
    if (!doc.is_array())
        throw FormatError("script file must hold a JSON array");

    auto entries = std::vector<ScriptEntry> {};
    for (const auto& item: doc)
    {
        auto entry = ScriptEntry {
            .matcher = item.value("match", std::string {}),
            .reply = item.value("reply", std::string {}),
        };
        auto fault = item.value("fault", std::string {});
        if (fault == "transport")
            entry.fault = ScriptedFault::transport;
        else if (fault == "timeout")
            entry.fault = ScriptedFault::timeout;
        else if (fault == "api")
            entry.fault = ScriptedFault::api;
        else if (!fault.empty())
            throw FormatError("unknown scripted fault: " + fault);
        entries.push_back(std::move(entry));
    }
    return entries;
}

ChatResponse CallbackBackend::complete(const ChatRequest& request)
{
    return synthetic_response(request, _responder(request));
}

} // namespace orchestra
