#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pilotgen/errors.hpp"
#include "pilotgen/harness.hpp"

namespace pilotgen::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kStderrTail = 4096;

void close_fd(int& fd) {
    if (fd >= 0) ::close(fd);
    fd = -1;
}

}  // namespace

class ProcessHarness::Process {
public:
    Process(const std::string& command, const std::filesystem::path& workingDir) {
        static const bool ignored = [] {
            ::signal(SIGPIPE, SIG_IGN);
            return true;
        }();
        (void)ignored;

        char pattern[] = "/tmp/pilotgen-harness-XXXXXX";
        const int errFd = ::mkstemp(pattern);
        if (errFd < 0) throw HarnessCrash(std::string("cannot create stderr log: ") + std::strerror(errno), {});
        stderrPath_ = pattern;

        int toChild[2];
        int fromChild[2];
        if (::pipe(toChild) != 0 || ::pipe(fromChild) != 0) {
            ::close(errFd);
            throw HarnessCrash(std::string("pipe: ") + std::strerror(errno), {});
        }
        const std::string shellCommand = command + " --stdio";
        pid_ = ::fork();
        if (pid_ < 0) {
            ::close(errFd);
            throw HarnessCrash(std::string("fork: ") + std::strerror(errno), {});
        }
        if (pid_ == 0) {
            ::dup2(toChild[0], STDIN_FILENO);
            ::dup2(fromChild[1], STDOUT_FILENO);
            ::dup2(errFd, STDERR_FILENO);
            ::close(toChild[0]);
            ::close(toChild[1]);
            ::close(fromChild[0]);
            ::close(fromChild[1]);
            ::close(errFd);
            if (!workingDir.empty() && ::chdir(workingDir.c_str()) != 0) _exit(127);
            ::execl("/bin/sh", "sh", "-c", shellCommand.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        ::close(toChild[0]);
        ::close(fromChild[1]);
        ::close(errFd);
        in_ = toChild[1];
        out_ = fromChild[0];
        ::fcntl(in_, F_SETFD, FD_CLOEXEC);
        ::fcntl(out_, F_SETFD, FD_CLOEXEC);
    }

    ~Process() {
        terminate();
        if (!stderrPath_.empty()) ::unlink(stderrPath_.c_str());
    }

    Process(const Process&) = delete;
    Process& operator=(const Process&) = delete;

    void send(const std::string& line) {
        std::size_t written = 0;
        while (written < line.size()) {
            const auto n = ::write(in_, line.data() + written, line.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw crash("harness stdin closed");
            }
            written += static_cast<std::size_t>(n);
        }
    }

    /// Next non-blank line, or throws on EOF / timeout.
    std::string receive(std::chrono::milliseconds timeout) {
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        for (;;) {
            if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                return line;
            }
            const auto remaining =
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
            if (remaining.count() <= 0) throw crash("harness did not respond within " + std::to_string(timeout.count()) + " ms");
            pollfd pfd{out_, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
            if (ready < 0) {
                if (errno == EINTR) continue;
                throw crash(std::string("poll: ") + std::strerror(errno));
            }
            if (ready == 0) continue;
            char chunk[8192];
            const auto n = ::read(out_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw crash(std::string("read: ") + std::strerror(errno));
            }
            if (n == 0) throw crash("harness exited");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    HarnessCrash crash(const std::string& what) {
        terminate();
        return HarnessCrash(what, stderr_tail());
    }

    /// False once the child has exited, even if no request noticed it yet.
    bool alive() {
        if (pid_ <= 0) return false;
        int status = 0;
        if (::waitpid(pid_, &status, WNOHANG) != pid_) return true;
        pid_ = -1;
        close_fd(in_);
        close_fd(out_);
        return false;
    }

private:
    void terminate() {
        close_fd(in_);
        close_fd(out_);
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            int status = 0;
            while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
            }
            pid_ = -1;
        }
    }

    std::string stderr_tail() const {
        std::ifstream in(stderrPath_, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        if (text.size() > kStderrTail) text.erase(0, text.size() - kStderrTail);
        return text;
    }

    pid_t pid_ = -1;
    int in_ = -1;
    int out_ = -1;
    std::string buffer_;
    std::string stderrPath_;
};

ProcessHarness::ProcessHarness(std::string command, std::filesystem::path workingDir,
                               std::chrono::milliseconds defaultTimeout)
    : command_(std::move(command)), workingDir_(std::move(workingDir)), defaultTimeout_(defaultTimeout) {}

ProcessHarness::~ProcessHarness() = default;

json ProcessHarness::exchange(const json& request, std::chrono::milliseconds timeout) {
    if (timeout.count() <= 0) timeout = defaultTimeout_;
    if (!process_ || !process_->alive()) process_ = std::make_unique<Process>(command_, workingDir_);
    process_->send(request.dump() + "\n");
    const std::string line = process_->receive(timeout);
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw process_->crash(std::string("unparseable harness response: ") + e.what());
    }
}

}  // namespace pilotgen::harness
