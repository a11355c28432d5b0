// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/agents.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace orchestra
{

/// Parses the plain-text exemplar transcript format:
///
///     # comment
///     === exemplar ===
///     sentinel: WTQ-LOGIC-1
///     --- user ---
///     ...
///     --- assistant ---
///     ...
///
/// The sentinel line is embedded as `(example <sentinel>)` at the top of the
/// first user turn. Throws FormatError on malformed input.
std::vector<FewShotExemplar> parse_exemplars(std::string_view source, AgentRole role);

/// Few-shot material for one benchmark family. The react list drives the
/// single-agent baseline.
struct ExemplarSet
{
    std::vector<FewShotExemplar> logic;
    std::vector<FewShotExemplar> query;
    std::vector<FewShotExemplar> react;
};

/// Exemplar sets keyed by family (`wikitq`, `tabfact`, ...), loaded from
/// `<dir>/<family>/{logic,query,react}.txt`. Missing role files leave that
/// role without exemplars.
class ExemplarLibrary
{
  public:
    ExemplarLibrary() = default;

    static ExemplarLibrary load(const std::filesystem::path& dir);

    void add(std::string family, ExemplarSet set);

    /// Falls back to `wikitq` (TableBench reuses its prompts), then to an
    /// empty set.
    [[nodiscard]] const ExemplarSet& get(std::string_view family) const;

    [[nodiscard]] std::vector<std::string> families() const;

  private:
    std::map<std::string, ExemplarSet, std::less<>> _sets;
};

/// Install-time prompts directory, overridable with ORCHESTRA_PROMPTS_DIR.
std::filesystem::path default_prompts_dir();

} // namespace orchestra
