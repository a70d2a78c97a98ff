#include "metamaint/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <mutex>
#include <system_error>

extern char** environ;

namespace metamaint {

namespace {

class Pipe {
public:
    Pipe()
    {
        if (::pipe2(fds_.data(), O_CLOEXEC) != 0)
            throw std::system_error(errno, std::generic_category(), "pipe2");
    }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;
    ~Pipe()
    {
        close_read();
        close_write();
    }

    int read_end() const { return fds_[0]; }
    int write_end() const { return fds_[1]; }
    void close_read() { close_fd(fds_[0]); }
    void close_write() { close_fd(fds_[1]); }

private:
    static void close_fd(int& fd)
    {
        if (fd >= 0) {
            ::close(fd);
            fd = -1;
        }
    }
    std::array<int, 2> fds_{-1, -1};
};

class SpawnActions {
public:
    SpawnActions() { posix_spawn_file_actions_init(&actions_); }
    ~SpawnActions() { posix_spawn_file_actions_destroy(&actions_); }
    SpawnActions(const SpawnActions&) = delete;
    SpawnActions& operator=(const SpawnActions&) = delete;

    posix_spawn_file_actions_t* get() { return &actions_; }

private:
    posix_spawn_file_actions_t actions_;
};

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, std::string_view input,
                          const std::filesystem::path& cwd)
{
    if (argv.empty())
        throw std::invalid_argument("run_process: empty argv");

    // A child that exits without consuming its stdin must surface as EPIPE.
    static std::once_flag sigpipe_once;
    std::call_once(sigpipe_once, [] { ::signal(SIGPIPE, SIG_IGN); });

    Pipe in, out, err;
    SpawnActions actions;
    posix_spawn_file_actions_adddup2(actions.get(), in.read_end(), STDIN_FILENO);
    posix_spawn_file_actions_adddup2(actions.get(), out.write_end(), STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(actions.get(), err.write_end(), STDERR_FILENO);
#if defined(__GLIBC__) && (__GLIBC__ > 2 || (__GLIBC__ == 2 && __GLIBC_MINOR__ >= 29))
    if (!cwd.empty())
        posix_spawn_file_actions_addchdir_np(actions.get(), cwd.c_str());
#else
    if (!cwd.empty())
        throw std::runtime_error("run_process: cwd unsupported on this platform");
#endif

    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv)
        args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    pid_t pid = 0;
    int rc = posix_spawnp(&pid, args[0], actions.get(), nullptr, args.data(), environ);
    if (rc != 0)
        throw std::system_error(rc, std::generic_category(), "spawn " + argv[0]);

    in.close_read();
    out.close_write();
    err.close_write();
    if (input.empty())
        in.close_write();
    else
        ::fcntl(in.write_end(), F_SETFL, O_NONBLOCK);

    ProcessResult result;
    std::size_t written = 0;
    std::array<char, 65536> buf{};
    bool out_open = true, err_open = true;

    while (out_open || err_open || in.write_end() >= 0) {
        std::array<pollfd, 3> fds{};
        nfds_t n = 0;
        int out_slot = -1, err_slot = -1, in_slot = -1;
        if (out_open) {
            out_slot = static_cast<int>(n);
            fds[n++] = {out.read_end(), POLLIN, 0};
        }
        if (err_open) {
            err_slot = static_cast<int>(n);
            fds[n++] = {err.read_end(), POLLIN, 0};
        }
        if (in.write_end() >= 0) {
            in_slot = static_cast<int>(n);
            fds[n++] = {in.write_end(), POLLOUT, 0};
        }
        if (::poll(fds.data(), n, -1) < 0) {
            if (errno == EINTR)
                continue;
            throw std::system_error(errno, std::generic_category(), "poll");
        }

        auto drain = [&](int slot, int fd, std::string& sink, bool& open) {
            if (slot < 0 || !(fds[slot].revents & (POLLIN | POLLHUP | POLLERR)))
                return;
            ssize_t got = ::read(fd, buf.data(), buf.size());
            if (got > 0)
                sink.append(buf.data(), static_cast<std::size_t>(got));
            else if (got == 0 || (errno != EINTR && errno != EAGAIN))
                open = false;
        };
        drain(out_slot, out.read_end(), result.out, out_open);
        drain(err_slot, err.read_end(), result.err, err_open);

        if (in_slot >= 0 && fds[in_slot].revents) {
            if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
                in.close_write();
            } else {
                ssize_t put = ::write(in.write_end(), input.data() + written, input.size() - written);
                if (put > 0)
                    written += static_cast<std::size_t>(put);
                else if (put < 0 && errno != EINTR && errno != EAGAIN)
                    in.close_write();
                if (written == input.size())
                    in.close_write();
            }
        }
    }

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR)
            throw std::system_error(errno, std::generic_category(), "waitpid");
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

} // namespace metamaint
