// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/llm.hpp>
#include <orchestra/openai_backend.hpp>
#include <orchestra/orchestrator.hpp>
#include <orchestra/tools.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace orchestra
{

/// Flat view of a `[section]` / `key = value` file. Keys are stored as
/// `section.key`; values may be double-quoted; `#` and `;` start comments.
class ConfigFile
{
  public:
    /// Throws FormatError with the 1-based line number on malformed lines or
    /// repeated keys.
    static ConfigFile parse(std::string_view source);
    static ConfigFile load(const std::filesystem::path& path);

    [[nodiscard]] std::optional<std::string> get(std::string_view key) const;
    [[nodiscard]] const std::map<std::string, std::string, std::less<>>& values() const noexcept { return _values; }

  private:
    std::map<std::string, std::string, std::less<>> _values;
};

/// Every knob of a run, with the standard episode settings as defaults.
struct RunConfig
{
    EpisodeConfig episode;
    LlmSettings llm;
    OpenAIBackendConfig endpoint;
    ToolSettings tools;
    std::filesystem::path prompts_dir;
    /// Exemplar family for ad-hoc questions (`orchestra run`).
    std::string family = "wikitq";
    /// Tasks in flight during a benchmark.
    int concurrency = 1;
};

/// Environment first (endpoint URL and key), then built-in defaults.
RunConfig default_run_config();

/// Overlays the recognised keys of `file` onto `base`. Unknown keys and
/// unparsable values raise FormatError naming the key.
///
/// Keys: llm.{endpoint, api_key, model, max_tokens, timeout_s, max_attempts,
/// backoff_s}, episode.{max_rounds, temperature, m, decision_agent, seed,
/// decision_draws, sample_concurrency, max_rows}, prompts.{dir, family},
/// sandbox.{command, timeout_s}, sql.budget_s, bench.concurrency.
RunConfig apply_config(const ConfigFile& file, RunConfig base);

} // namespace orchestra
