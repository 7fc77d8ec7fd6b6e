#include "rmes/bench/external_objective.hpp"

#include "rmes/errors.hpp"

#include <spdlog/spdlog.h>

#include <cerrno>
#include <charconv>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>
#include <unistd.h>

namespace rmes::bench {
namespace {

constexpr std::size_t kDiagnosticTail = 2000;

std::string read_tail(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (text.size() > kDiagnosticTail) text = "..." + text.substr(text.size() - kDiagnosticTail);
  return text;
}

std::string describe_status(int status) {
  if (WIFEXITED(status)) return "exited with status " + std::to_string(WEXITSTATUS(status));
  if (WIFSIGNALED(status)) return "killed by signal " + std::to_string(WTERMSIG(status));
  return "stopped";
}

}  // namespace

ExternalProcess::ExternalProcess(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw InputError("external objective command is empty");

  // A dead child must surface as a write error, not terminate the process.
  struct sigaction current {};
  if (sigaction(SIGPIPE, nullptr, &current) == 0 && current.sa_handler == SIG_DFL) std::signal(SIGPIPE, SIG_IGN);

  char stderr_template[] = "/tmp/rmes-external-XXXXXX";
  const int err_fd = mkstemp(stderr_template);
  if (err_fd < 0) throw std::runtime_error("cannot create diagnostics file: " + std::string(std::strerror(errno)));
  stderr_path_ = stderr_template;

  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    close(err_fd);
    throw std::runtime_error("cannot create pipes: " + std::string(std::strerror(errno)));
  }
  pid_ = fork();
  if (pid_ < 0) throw std::runtime_error("cannot fork: " + std::string(std::strerror(errno)));
  if (pid_ == 0) {
    dup2(in_pipe[0], STDIN_FILENO);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_fd, STDERR_FILENO);
    close(in_pipe[0]);
    close(in_pipe[1]);
    close(out_pipe[0]);
    close(out_pipe[1]);
    close(err_fd);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in_pipe[0]);
  close(out_pipe[1]);
  close(err_fd);
  fcntl(in_pipe[1], F_SETFD, FD_CLOEXEC);
  fcntl(out_pipe[0], F_SETFD, FD_CLOEXEC);
  to_child_ = fdopen(in_pipe[1], "w");
  from_child_ = fdopen(out_pipe[0], "r");
  if (to_child_ == nullptr || from_child_ == nullptr) fail("cannot open pipe streams");
  spdlog::debug("started external objective '{}' (pid {})", command_, pid_);
}

ExternalProcess::~ExternalProcess() {
  shutdown();
  if (!stderr_path_.empty()) std::remove(stderr_path_.c_str());
}

void ExternalProcess::shutdown() {
  if (to_child_ != nullptr) {
    std::fclose(to_child_);
    to_child_ = nullptr;
  }
  if (from_child_ != nullptr) {
    std::fclose(from_child_);
    from_child_ = nullptr;
  }
  if (pid_ > 0) {
    int status = 0;
    waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExternalProcess::fail(const std::string& what) {
  std::string message = "external objective '" + command_ + "': " + what;
  if (to_child_ != nullptr) {
    std::fclose(to_child_);
    to_child_ = nullptr;
  }
  if (pid_ > 0) {
    int status = 0;
    if (waitpid(pid_, &status, WNOHANG) == 0) {
      kill(pid_, SIGTERM);
      waitpid(pid_, &status, 0);
    }
    message += " (command " + describe_status(status) + ")";
    pid_ = -1;
  }
  const std::string diagnostics = read_tail(stderr_path_);
  if (!diagnostics.empty()) message += "\n" + diagnostics;
  throw std::runtime_error(message);
}

double ExternalProcess::query(const Eigen::VectorXd& x) {
  std::lock_guard lock(mutex_);
  if (pid_ <= 0 || to_child_ == nullptr) fail("process is no longer running");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::fprintf(to_child_, i == 0 ? "%.17g" : " %.17g", x[i]) < 0) fail("write to command failed");
  }
  if (std::fputc('\n', to_child_) == EOF || std::fflush(to_child_) != 0) fail("write to command failed");

  std::string line;
  for (int c = std::fgetc(from_child_); c != EOF && c != '\n'; c = std::fgetc(from_child_)) {
    line.push_back(static_cast<char>(c));
  }
  if (line.empty() && std::feof(from_child_)) fail("command closed its output");
  const auto first = line.find_first_not_of(" \t\r");
  const auto last = line.find_last_not_of(" \t\r");
  if (first == std::string::npos) fail("empty reply line");
  const std::string_view token(line.data() + first, last - first + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    fail("reply '" + line + "' is not a finite number");
  }
  return value;
}

ObjectiveSpec make_external(const std::string& command, const Domain& domain, std::optional<GroundTruth> truth) {
  auto process = std::make_shared<ExternalProcess>(command);
  ObjectiveSpec spec("external", ObjectiveKind::external, domain,
                     [process](const Eigen::VectorXd& x) { return process->query(x); }, 0.0);
  if (truth) spec.set_truth(std::move(*truth));
  return spec;
}

}  // namespace rmes::bench
