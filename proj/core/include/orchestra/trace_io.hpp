// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <orchestra/orchestrator.hpp>

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <string_view>

namespace orchestra
{

/// One JSON object: task_id, sample_index, trace, candidate, usage.
std::string trace_record_json(std::string_view task_id, int sample_index, const EpisodeTrace& trace,
                              const CandidateAnswer& candidate, const UsageStats& usage);

/// Append-only JSON-lines sink shared by concurrent samples.
class TraceWriter
{
  public:
    /// Truncates `path`. Throws Error when it cannot be opened.
    explicit TraceWriter(const std::filesystem::path& path);

    void write(std::string_view task_id, int sample_index, const EpisodeTrace& trace,
               const CandidateAnswer& candidate, const UsageStats& usage);

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return _path; }

  private:
    std::filesystem::path _path;
    std::mutex _mutex;
    std::ofstream _out;
};

} // namespace orchestra
