// SPDX-License-Identifier: Apache-2.0
#include <orchestra/config.hpp>
#include <orchestra/error.hpp>
#include <orchestra/exemplars.hpp>

#include "text_util.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace orchestra
{

namespace
{

std::string strip_comment(std::string_view line)
{
    // Comment markers inside a quoted value are kept.
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        if (line[i] == '"')
            quoted = !quoted;
        else if (!quoted && (line[i] == '#' || line[i] == ';'))
            return std::string(line.substr(0, i));
    }
    return std::string(line);
}

std::string unquote(std::string_view value, int line_no)
{
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
    {
        auto out = std::string {};
        for (std::size_t i = 1; i + 1 < value.size(); ++i)
        {
            if (value[i] == '\\' && i + 2 < value.size())
            {
                ++i;
                out += value[i] == 'n' ? '\n' : value[i] == 't' ? '\t' : value[i];
            }
            else
            {
                out += value[i];
            }
        }
        return out;
    }
    if (value.find('"') != std::string_view::npos)
        throw FormatError("config line " + std::to_string(line_no) + ": unbalanced quotes");
    return std::string(value);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value)
{
    throw FormatError("config key " + std::string(key) + ": invalid value '" + std::string(value) + "'");
}

long long to_integer(std::string_view key, std::string_view value)
{
    long long out = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc {} || end != value.data() + value.size())
        bad_value(key, value);
    return out;
}

int to_int(std::string_view key, std::string_view value)
{
    auto v = to_integer(key, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        bad_value(key, value);
    return static_cast<int>(v);
}

double to_double(std::string_view key, std::string_view value)
{
    double out = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc {} || end != value.data() + value.size())
        bad_value(key, value);
    return out;
}

bool to_bool(std::string_view key, std::string_view value)
{
    auto lower = text::to_lower(value);
    if (lower == "true" || lower == "yes" || lower == "on" || lower == "1")
        return true;
    if (lower == "false" || lower == "no" || lower == "off" || lower == "0")
        return false;
    bad_value(key, value);
}

template<typename Duration>
Duration to_duration(std::string_view key, std::string_view value)
{
    auto seconds = to_double(key, value);
    if (seconds <= 0)
        bad_value(key, value);
    return std::chrono::duration_cast<Duration>(std::chrono::duration<double>(seconds));
}

std::vector<std::string> split_words(std::string_view value)
{
    auto words = std::vector<std::string> {};
    auto in = std::istringstream(std::string(value));
    for (std::string word; in >> word;)
        words.push_back(word);
    return words;
}

} // namespace

ConfigFile ConfigFile::parse(std::string_view source)
{
    auto config = ConfigFile {};
    auto section = std::string {};
    int line_no = 0;
    for (auto raw: text::split_lines(source))
    {
        ++line_no;
        auto stripped = strip_comment(raw);
        auto line = text::trim(stripped);
        if (line.empty())
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                throw FormatError("config line " + std::to_string(line_no) + ": unterminated section header");
            section = std::string(text::trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw FormatError("config line " + std::to_string(line_no) + ": empty section name");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw FormatError("config line " + std::to_string(line_no) + ": expected key = value");
        auto key = std::string(text::trim(line.substr(0, eq)));
        if (key.empty())
            throw FormatError("config line " + std::to_string(line_no) + ": empty key");
        auto full_key = section.empty() ? key : section + "." + key;
        auto value = unquote(text::trim(line.substr(eq + 1)), line_no);
        if (!config._values.emplace(full_key, std::move(value)).second)
            throw FormatError("config line " + std::to_string(line_no) + ": duplicate key " + full_key);
    }
    return config;
}

ConfigFile ConfigFile::load(const std::filesystem::path& path)
{
    auto in = std::ifstream(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot read config file " + path.string());
    auto buffer = std::ostringstream {};
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::optional<std::string> ConfigFile::get(std::string_view key) const
{
    auto it = _values.find(key);
    if (it == _values.end())
        return std::nullopt;
    return it->second;
}

RunConfig default_run_config()
{
    auto config = RunConfig {};
    config.endpoint = OpenAIBackendConfig::from_environment();
    config.prompts_dir = default_prompts_dir();
    return config;
}

RunConfig apply_config(const ConfigFile& file, RunConfig base)
{
    for (const auto& [key, value]: file.values())
    {
        if (key == "llm.endpoint")
            base.endpoint.base_url = value;
        else if (key == "llm.api_key")
            base.endpoint.api_key = value;
        else if (key == "llm.model")
            base.llm.model = value;
        else if (key == "llm.max_tokens")
            base.llm.max_tokens = to_int(key, value);
        else if (key == "llm.timeout_s")
            base.endpoint.timeout = to_duration<std::chrono::seconds>(key, value);
        else if (key == "llm.max_attempts")
            base.llm.retry.max_attempts = to_int(key, value);
        else if (key == "llm.backoff_s")
            base.llm.retry.initial_backoff = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::duration<double>(to_double(key, value)));
        else if (key == "episode.max_rounds")
            base.episode.max_rounds = to_int(key, value);
        else if (key == "episode.temperature")
            base.episode.temperature = to_double(key, value);
        else if (key == "episode.m")
            base.episode.m_samples = to_int(key, value);
        else if (key == "episode.decision_agent")
            base.episode.decision_agent_enabled = to_bool(key, value);
        else if (key == "episode.seed")
            base.episode.seed_base = to_integer(key, value);
        else if (key == "episode.decision_draws")
            base.episode.decision_draws = to_int(key, value);
        else if (key == "episode.sample_concurrency")
            base.episode.concurrency = to_int(key, value);
        else if (key == "episode.max_rows")
            base.episode.render.max_rows = to_int(key, value);
        else if (key == "prompts.dir")
            base.prompts_dir = value;
        else if (key == "prompts.family")
            base.family = value;
        else if (key == "sandbox.command")
        {
            base.tools.sandbox_command = split_words(value);
            if (base.tools.sandbox_command.empty())
                bad_value(key, value);
        }
        else if (key == "sandbox.timeout_s")
            base.tools.sandbox_timeout = to_duration<std::chrono::milliseconds>(key, value);
        else if (key == "sql.budget_s")
            base.tools.sql_budget = to_duration<std::chrono::milliseconds>(key, value);
        else if (key == "bench.concurrency")
            base.concurrency = to_int(key, value);
        else
            throw FormatError("unknown config key " + key);
    }
    return base;
}

} // namespace orchestra
