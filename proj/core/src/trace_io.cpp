// SPDX-License-Identifier: Apache-2.0
#include <orchestra/trace_io.hpp>

#include <nlohmann/json.hpp>

namespace orchestra
{

namespace
{

using json = nlohmann::ordered_json;

json table_json(const Table& table)
{
    return {{"name", table.name()}, {"columns", table.columns()}, {"rows", table.rows()}};
}

json trace_json(const EpisodeTrace& trace)
{
    auto rounds = json::array();
    for (const auto& round: trace.rounds)
    {
        auto program = round.program ? json {{"kind", to_string(round.program->kind())},
                                              {"code", round.program->code()}}
                                     : json(nullptr);
        rounds.push_back({
            {"reasoning", round.reasoning},
            {"instruction", round.instruction},
            {"program", std::move(program)},
            {"observation", table_json(round.observation)},
            {"ok", round.ok},
        });
    }
    auto out = json {
        {"rounds", std::move(rounds)},
        {"preliminary_answer", trace.preliminary_answer ? json(*trace.preliminary_answer) : json(nullptr)},
        {"terminated_by", to_string(trace.terminated_by)},
    };
    if (!trace.error.empty())
        out["error"] = trace.error;
    return out;
}

} // namespace

std::string trace_record_json(std::string_view task_id, int sample_index, const EpisodeTrace& trace,
                              const CandidateAnswer& candidate, const UsageStats& usage)
{
    auto record = json {
        {"task_id", std::string(task_id)},
        {"sample_index", sample_index},
        {"trace", trace_json(trace)},
        {"candidate", {{"text", candidate.text}, {"normalized", candidate.normalized}}},
        {"usage",
         {
             {"requests", usage.requests},
             {"input_tokens", usage.input_tokens},
             {"output_tokens", usage.output_tokens},
             {"wall_time_s", usage.wall_time_s},
         }},
    };
    return record.dump(-1, ' ', false, json::error_handler_t::replace);
}

TraceWriter::TraceWriter(const std::filesystem::path& path): _path(path), _out(path, std::ios::trunc)
{
    if (!_out)
        throw Error("cannot open trace file " + path.string());
}

void TraceWriter::write(std::string_view task_id, int sample_index, const EpisodeTrace& trace,
                        const CandidateAnswer& candidate, const UsageStats& usage)
{
    auto line = trace_record_json(task_id, sample_index, trace, candidate, usage);
    auto lock = std::lock_guard(_mutex);
    _out << line << '\n';
    _out.flush();
}

} // namespace orchestra
