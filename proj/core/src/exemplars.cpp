// SPDX-License-Identifier: Apache-2.0
#include <orchestra/error.hpp>
#include <orchestra/exemplars.hpp>

#include "text_util.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace orchestra
{

std::vector<FewShotExemplar> parse_exemplars(std::string_view source, AgentRole role)
{
    auto exemplars = std::vector<FewShotExemplar> {};
    FewShotExemplar* current = nullptr;
    ChatMessage* turn = nullptr;
    std::size_t line_no = 0;

    auto finish_turn = [&] {
        if (turn != nullptr)
            turn->content = std::string(text::trim(turn->content));
        turn = nullptr;
    };

    for (auto line: text::split_lines(source))
    {
        ++line_no;
        auto trimmed = text::trim(line);
        if (trimmed == "=== exemplar ===")
        {
            finish_turn();
            exemplars.push_back(FewShotExemplar {role, {}, {}});
            current = &exemplars.back();
            continue;
        }
        if (current == nullptr)
        {
            if (!trimmed.empty() && !trimmed.starts_with('#'))
                throw FormatError("exemplar text before the first '=== exemplar ===' at line "
                                  + std::to_string(line_no));
            continue;
        }
        if (trimmed == "--- user ---" || trimmed == "--- assistant ---")
        {
            finish_turn();
            auto role_of_turn = trimmed == "--- user ---" ? Role::user : Role::assistant;
            current->turns.push_back(ChatMessage {role_of_turn, {}});
            turn = &current->turns.back();
            continue;
        }
        if (turn == nullptr)
        {
            if (text::iequals_prefix(trimmed, "sentinel:"))
                current->sentinel = std::string(text::trim(trimmed.substr(9)));
            else if (!trimmed.empty() && !trimmed.starts_with('#'))
                throw FormatError("unexpected text outside a turn at line " + std::to_string(line_no));
            continue;
        }
        turn->content += line;
        turn->content += '\n';
    }
    finish_turn();

    for (auto& exemplar: exemplars)
    {
        if (exemplar.sentinel.empty())
            throw FormatError("exemplar without a sentinel line");
        validate_exemplar(exemplar);
        exemplar.turns.front().content = "(example " + exemplar.sentinel + ")\n" + exemplar.turns.front().content;
    }
    return exemplars;
}

namespace
{

std::vector<FewShotExemplar> load_role_file(const std::filesystem::path& path, AgentRole role)
{
    if (!std::filesystem::exists(path))
        return {};
    auto in = std::ifstream(path);
    if (!in)
        throw FormatError("cannot read exemplar file " + path.string());
    auto buffer = std::stringstream {};
    buffer << in.rdbuf();
    try
    {
        return parse_exemplars(buffer.str(), role);
    }
    catch (const FormatError& e)
    {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace

ExemplarLibrary ExemplarLibrary::load(const std::filesystem::path& dir)
{
    if (!std::filesystem::is_directory(dir))
        throw FormatError("prompts directory not found: " + dir.string());
    auto library = ExemplarLibrary {};
    for (const auto& entry: std::filesystem::directory_iterator(dir))
    {
        if (!entry.is_directory())
            continue;
        auto set = ExemplarSet {
            .logic = load_role_file(entry.path() / "logic.txt", AgentRole::logic),
            .query = load_role_file(entry.path() / "query.txt", AgentRole::query),
            .react = load_role_file(entry.path() / "react.txt", AgentRole::logic),
        };
        library.add(entry.path().filename().string(), std::move(set));
    }
    return library;
}

void ExemplarLibrary::add(std::string family, ExemplarSet set)
{
    _sets[std::move(family)] = std::move(set);
}

const ExemplarSet& ExemplarLibrary::get(std::string_view family) const
{
    static const auto empty = ExemplarSet {};
    if (auto it = _sets.find(family); it != _sets.end())
        return it->second;
    if (auto it = _sets.find(std::string_view("wikitq")); it != _sets.end())
        return it->second;
    return empty;
}

std::vector<std::string> ExemplarLibrary::families() const
{
    auto names = std::vector<std::string> {};
    for (const auto& [name, set]: _sets)
        names.push_back(name);
    return names;
}

std::filesystem::path default_prompts_dir()
{
    if (const char* env = std::getenv("ORCHESTRA_PROMPTS_DIR"); env != nullptr && *env != '\0')
        return env;
    auto installed = std::filesystem::path(ORCHESTRA_DEFAULT_PROMPTS_DIR);
    if (std::filesystem::is_directory(installed))
        return installed;
    return ORCHESTRA_SOURCE_PROMPTS_DIR;
}

} // namespace orchestra
