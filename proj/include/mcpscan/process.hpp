#pragma once

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mcpscan/result.hpp"

namespace mcpscan {

namespace detail {

inline void ignore_sigpipe_once() {
    static std::once_flag once;
    std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

inline std::int64_t now_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(steady_clock::now().time_since_epoch()).count();
}

} // namespace detail

/// A child process with piped stdio. Reads are line-oriented with
/// deadlines; stderr drains into a capped diagnostics buffer and is
/// never parsed. Each instance owns exactly one process; sessions built
/// on top share nothing.
class ChildProcess {
public:
    struct Options {
        std::map<std::string, std::string> env; // overlaid on the parent env
        std::string cwd;
    };

    enum class ReadStatus { line, eof, timeout };
    struct ReadResult {
        ReadStatus status;
        std::string line;
    };

    ChildProcess() = default;
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    ChildProcess(ChildProcess&& other) noexcept { move_from(other); }
    ChildProcess& operator=(ChildProcess&& other) noexcept {
        if (this != &other) {
            dispose();
            move_from(other);
        }
        return *this;
    }

    ~ChildProcess() { dispose(); }

    static Result<ChildProcess> spawn(const std::vector<std::string>& argv,
                                      const Options& opts = {}) {
        using R = Result<ChildProcess>;
        if (argv.empty()) return R::failure("spawn-failure", "empty command");
        detail::ignore_sigpipe_once();

        int in_pipe[2], out_pipe[2], err_pipe[2], exec_pipe[2];
        if (::pipe(in_pipe) != 0 || ::pipe(out_pipe) != 0 || ::pipe(err_pipe) != 0 ||
            ::pipe(exec_pipe) != 0)
            return R::failure("spawn-failure", std::string("pipe: ") + std::strerror(errno));
        ::fcntl(exec_pipe[1], F_SETFD, FD_CLOEXEC);

        pid_t pid = ::fork();
        if (pid < 0) {
            for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                           err_pipe[1], exec_pipe[0], exec_pipe[1]})
                ::close(fd);
            return R::failure("spawn-failure", std::string("fork: ") + std::strerror(errno));
        }

        if (pid == 0) {
            // Child. Own process group so teardown reaches grandchildren.
            ::setpgid(0, 0);
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::dup2(err_pipe[1], STDERR_FILENO);
            for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0],
                           err_pipe[1], exec_pipe[0]})
                ::close(fd);
            if (!opts.cwd.empty() && ::chdir(opts.cwd.c_str()) != 0) _exit(127);
            for (const auto& [k, v] : opts.env) ::setenv(k.c_str(), v.c_str(), 1);
            std::vector<char*> cargv;
            cargv.reserve(argv.size() + 1);
            for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
            cargv.push_back(nullptr);
            ::execvp(cargv[0], cargv.data());
            int err = errno;
            ssize_t ignored = ::write(exec_pipe[1], &err, sizeof err);
            (void)ignored;
            _exit(127);
        }

        // Parent.
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        ::close(err_pipe[1]);
        ::close(exec_pipe[1]);
        ::fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
        ::fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

        int exec_errno = 0;
        ssize_t n = ::read(exec_pipe[0], &exec_errno, sizeof exec_errno);
        ::close(exec_pipe[0]);
        if (n > 0) {
            // exec failed; reap and report.
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(err_pipe[0]);
            int status = 0;
            ::waitpid(pid, &status, 0);
            return R::failure("spawn-failure",
                              argv[0] + ": " + std::strerror(exec_errno));
        }

        ChildProcess proc;
        proc.pid_ = pid;
        proc.stdin_fd_ = in_pipe[1];
        proc.stdout_fd_ = out_pipe[0];
        proc.stderr_fd_ = err_pipe[0];
        proc.reaped_ = false;
        return R(std::move(proc));
    }

    pid_t pid() const { return pid_; }
    bool running() const { return pid_ > 0 && !reaped_; }

    /// Non-blocking liveness probe; reaps on exit.
    bool alive() {
        if (pid_ <= 0 || reaped_) return false;
        int status = 0;
        pid_t r = ::waitpid(pid_, &status, WNOHANG);
        if (r == pid_) {
            reaped_ = true;
            exit_status_ = status;
            return false;
        }
        return r == 0;
    }

    bool write_line(const std::string& line) {
        if (stdin_fd_ < 0) return false;
        std::string buf = line;
        buf += '\n';
        std::size_t off = 0;
        while (off < buf.size()) {
            ssize_t n = ::write(stdin_fd_, buf.data() + off, buf.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                return false;
            }
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    void close_stdin() {
        if (stdin_fd_ >= 0) {
            ::close(stdin_fd_);
            stdin_fd_ = -1;
        }
    }

    /// Next stdout line within the timeout. Drains stderr on the side so
    /// a chatty server cannot deadlock on a full pipe.
    ReadResult read_line(std::chrono::milliseconds timeout) {
        const std::int64_t deadline = detail::now_ms() + timeout.count();
        for (;;) {
            if (auto line = take_buffered_line()) return {ReadStatus::line, std::move(*line)};
            if (stdout_eof_) return {ReadStatus::eof, {}};

            std::int64_t remain = deadline - detail::now_ms();
            if (remain < 0) remain = 0;

            struct pollfd fds[2];
            nfds_t nfds = 0;
            fds[nfds++] = {stdout_fd_, POLLIN, 0};
            if (stderr_fd_ >= 0) fds[nfds++] = {stderr_fd_, POLLIN, 0};

            int ready = ::poll(fds, nfds, static_cast<int>(remain));
            if (ready < 0) {
                if (errno == EINTR) continue;
                stdout_eof_ = true;
                return {ReadStatus::eof, {}};
            }
            if (ready == 0) return {ReadStatus::timeout, {}};

            for (nfds_t i = 0; i < nfds; ++i) {
                if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
                if (fds[i].fd == stdout_fd_) {
                    if (!drain(stdout_fd_, stdout_buf_)) stdout_eof_ = true;
                } else {
                    if (!drain(stderr_fd_, stderr_buf_)) {
                        ::close(stderr_fd_);
                        stderr_fd_ = -1;
                    }
                    trim_stderr();
                }
            }
        }
    }

    /// Captured stderr, capped to the most recent 64 KiB.
    const std::string& stderr_tail() const { return stderr_buf_; }

    /// Graceful-then-forced teardown; always reaps. Returns the wait
    /// status (0 when already gone). Safe to call more than once.
    int terminate(std::chrono::milliseconds stdin_grace = std::chrono::milliseconds(300),
                  std::chrono::milliseconds term_grace = std::chrono::milliseconds(2000)) {
        if (pid_ <= 0) return exit_status_;
        close_stdin();
        if (wait_exit(stdin_grace)) return finish();
        ::kill(-pid_, SIGTERM);
        ::kill(pid_, SIGTERM);
        if (wait_exit(term_grace)) return finish();
        ::kill(-pid_, SIGKILL);
        ::kill(pid_, SIGKILL);
        int status = 0;
        if (!reaped_ && ::waitpid(pid_, &status, 0) == pid_) {
            reaped_ = true;
            exit_status_ = status;
        }
        return finish();
    }

private:
    void move_from(ChildProcess& other) {
        pid_ = other.pid_;
        stdin_fd_ = other.stdin_fd_;
        stdout_fd_ = other.stdout_fd_;
        stderr_fd_ = other.stderr_fd_;
        stdout_buf_ = std::move(other.stdout_buf_);
        stderr_buf_ = std::move(other.stderr_buf_);
        stdout_eof_ = other.stdout_eof_;
        reaped_ = other.reaped_;
        exit_status_ = other.exit_status_;
        other.pid_ = -1;
        other.stdin_fd_ = other.stdout_fd_ = other.stderr_fd_ = -1;
        other.reaped_ = true;
    }

    void dispose() {
        if (pid_ > 0 && !reaped_) terminate();
        for (int* fd : {&stdin_fd_, &stdout_fd_, &stderr_fd_}) {
            if (*fd >= 0) {
                ::close(*fd);
                *fd = -1;
            }
        }
        pid_ = -1;
    }

    int finish() {
        for (int* fd : {&stdout_fd_, &stderr_fd_}) {
            if (*fd >= 0) {
                ::close(*fd);
                *fd = -1;
            }
        }
        return exit_status_;
    }

    bool wait_exit(std::chrono::milliseconds grace) {
        const std::int64_t deadline = detail::now_ms() + grace.count();
        for (;;) {
            if (reaped_) return true;
            int status = 0;
            pid_t r = ::waitpid(pid_, &status, WNOHANG);
            if (r == pid_) {
                reaped_ = true;
                exit_status_ = status;
                return true;
            }
            if (r < 0) {
                reaped_ = true;
                return true;
            }
            if (detail::now_ms() >= deadline) return false;
            ::usleep(10 * 1000);
        }
    }

    std::optional<std::string> take_buffered_line() {
        auto nl = stdout_buf_.find('\n');
        if (nl == std::string::npos) return std::nullopt;
        std::string line = stdout_buf_.substr(0, nl);
        stdout_buf_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    static bool drain(int fd, std::string& buf) {
        char chunk[4096];
        for (;;) {
            ssize_t n = ::read(fd, chunk, sizeof chunk);
            if (n > 0) {
                buf.append(chunk, static_cast<std::size_t>(n));
                if (n == sizeof chunk) continue;
                return true;
            }
            if (n == 0) return false;
            if (errno == EINTR) continue;
            return errno == EAGAIN || errno == EWOULDBLOCK;
        }
    }

    void trim_stderr() {
        constexpr std::size_t cap = 64 * 1024;
        if (stderr_buf_.size() > cap) stderr_buf_.erase(0, stderr_buf_.size() - cap);
    }

    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    int stderr_fd_ = -1;
    std::string stdout_buf_;
    std::string stderr_buf_;
    bool stdout_eof_ = false;
    bool reaped_ = true;
    int exit_status_ = 0;
};

} // namespace mcpscan
