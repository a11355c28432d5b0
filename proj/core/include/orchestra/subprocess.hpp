// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace orchestra
{

struct ProcessResult
{
    std::string stdout_text;
    std::string stderr_text;
    /// Exit status when the process exited normally.
    std::optional<int> exit_code;
    /// Signal number when the process was terminated by a signal.
    std::optional<int> signal;
    bool timed_out = false;
};

/// Locates `program` the way execvp would: verbatim if it contains a slash,
/// otherwise in each PATH directory. Returns an empty string when absent.
std::string find_executable(const std::string& program);

/// Spawns `argv` in its own process group, feeds `input` to stdin, closes it
/// and collects stdout/stderr. When `timeout` elapses first the whole group
/// is killed with SIGKILL and `timed_out` is set.
///
/// Throws std::system_error if the process cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          std::chrono::milliseconds timeout);

} // namespace orchestra
