// SPDX-License-Identifier: Apache-2.0
#include <orchestra/subprocess.hpp>

#include "text_util.hpp"

#include <cerrno>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <system_error>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace orchestra
{

namespace
{

[[noreturn]] void throw_errno(const char* what)
{
    throw std::system_error(errno, std::generic_category(), what);
}

class Fd
{
  public:
    Fd() = default;
    explicit Fd(int fd): _fd(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& other) noexcept: _fd(other.release()) {}
    Fd& operator=(Fd&& other) noexcept
    {
        if (this != &other)
        {
            reset();
            _fd = other.release();
        }
        return *this;
    }
    ~Fd() { reset(); }

    [[nodiscard]] int get() const noexcept { return _fd; }
    [[nodiscard]] bool valid() const noexcept { return _fd >= 0; }
    int release() noexcept
    {
        int fd = _fd;
        _fd = -1;
        return fd;
    }
    void reset() noexcept
    {
        if (_fd >= 0)
            ::close(_fd);
        _fd = -1;
    }

  private:
    int _fd = -1;
};

struct Pipe
{
    Fd read;
    Fd write;

    Pipe()
    {
        int fds[2];
        if (::pipe2(fds, O_CLOEXEC) != 0)
            throw_errno("pipe2");
        read = Fd(fds[0]);
        write = Fd(fds[1]);
    }
};

bool is_executable_file(const std::string& path)
{
    struct stat info {};
    return ::stat(path.c_str(), &info) == 0 && S_ISREG(info.st_mode) && ::access(path.c_str(), X_OK) == 0;
}

void set_nonblocking(int fd)
{
    int flags = ::fcntl(fd, F_GETFL);
    if (flags < 0 || ::fcntl(fd, F_SETFL, flags | O_NONBLOCK) < 0)
        throw_errno("fcntl");
}

} // namespace

std::string find_executable(const std::string& program)
{
    if (program.empty())
        return {};
    if (program.find('/') != std::string::npos)
        return is_executable_file(program) ? program : std::string {};

    const char* path = std::getenv("PATH");
    if (path == nullptr)
        return {};
    for (auto dir: text::split(path, ':'))
    {
        auto candidate = (dir.empty() ? std::string(".") : std::string(dir)) + "/" + program;
        if (is_executable_file(candidate))
            return candidate;
    }
    return {};
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input,
                          std::chrono::milliseconds timeout)
{
    if (argv.empty())
        throw std::invalid_argument("run_process needs a program");

    auto in = Pipe {};
    auto out = Pipe {};
    auto err = Pipe {};

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.read.get(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.write.get(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.write.get(), STDERR_FILENO);

    posix_spawnattr_t attributes;
    posix_spawnattr_init(&attributes);
    posix_spawnattr_setflags(&attributes, POSIX_SPAWN_SETPGROUP | POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);
    posix_spawnattr_setpgroup(&attributes, 0);
    sigset_t empty_mask;
    sigemptyset(&empty_mask);
    posix_spawnattr_setsigmask(&attributes, &empty_mask);
    sigset_t default_signals;
    sigemptyset(&default_signals);
    sigaddset(&default_signals, SIGPIPE);
    posix_spawnattr_setsigdefault(&attributes, &default_signals);

    auto args = std::vector<char*> {};
    for (const auto& arg: argv)
        args.push_back(const_cast<char*>(arg.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    int rc = ::posix_spawnp(&pid, args[0], &actions, &attributes, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    posix_spawnattr_destroy(&attributes);
    if (rc != 0)
        throw std::system_error(rc, std::generic_category(), "posix_spawnp " + argv[0]);

    in.read.reset();
    out.write.reset();
    err.write.reset();
    set_nonblocking(in.write.get());
    set_nonblocking(out.read.get());
    set_nonblocking(err.read.get());

    // A child that exits without reading stdin must not kill us with SIGPIPE.
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

    auto result = ProcessResult {};
    std::size_t written = 0;
    if (input.empty())
        in.write.reset();

    auto deadline = std::chrono::steady_clock::now() + timeout;
    char buffer[8192];
    while (out.read.valid() || err.read.valid())
    {
        auto now = std::chrono::steady_clock::now();
        if (now >= deadline)
        {
            result.timed_out = true;
            break;
        }
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();

        pollfd fds[3];
        int count = 0;
        auto watch = [&](const Fd& fd, short events) {
            if (fd.valid())
                fds[count++] = pollfd {fd.get(), events, 0};
        };
        watch(in.write, POLLOUT);
        watch(out.read, POLLIN);
        watch(err.read, POLLIN);

        int ready = ::poll(fds, static_cast<nfds_t>(count), static_cast<int>(remaining > 0 ? remaining : 1));
        if (ready < 0)
        {
            if (errno == EINTR)
                continue;
            break;
        }
        for (int i = 0; i < count; ++i)
        {
            if (fds[i].revents == 0)
                continue;
            if (in.write.valid() && fds[i].fd == in.write.get())
            {
                auto n = ::write(in.write.get(), input.data() + written, input.size() - written);
                if (n > 0)
                    written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EINTR)
                    in.write.reset();
                else if (written >= input.size())
                    in.write.reset();
                continue;
            }
            auto& target = fds[i].fd == out.read.get() ? out.read : err.read;
            auto& sink = fds[i].fd == out.read.get() ? result.stdout_text : result.stderr_text;
            auto n = ::read(target.get(), buffer, sizeof buffer);
            if (n > 0)
                sink.append(buffer, static_cast<std::size_t>(n));
            else if (n == 0 || (errno != EAGAIN && errno != EINTR))
                target.reset();
        }
    }

    int status = 0;
    bool reaped = false;
    // The child may close its pipes and keep running; the deadline still holds.
    while (!result.timed_out)
    {
        auto r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid || (r < 0 && errno != EINTR))
        {
            reaped = r == pid;
            break;
        }
        if (std::chrono::steady_clock::now() >= deadline)
        {
            result.timed_out = true;
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (result.timed_out)
        ::kill(-pid, SIGKILL);
    if (!reaped)
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR)
        {
        }

    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.signal = WTERMSIG(status);
    return result;
}

} // namespace orchestra
