#pragma once

// A user-supplied black box running as a child process. The command is
// started once through /bin/sh; each query is written to its standard input
// as one line of space-separated coordinates and answered with one real per
// line on its standard output.

#include "rmes/bench/objectives.hpp"

#include <Eigen/Dense>

#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <sys/types.h>

namespace rmes::bench {

class ExternalProcess {
 public:
  explicit ExternalProcess(std::string command);
  ~ExternalProcess();
  ExternalProcess(const ExternalProcess&) = delete;
  ExternalProcess& operator=(const ExternalProcess&) = delete;

  /// Throws std::runtime_error with the command's exit status and captured
  /// standard error if it dies or answers with something other than a number.
  [[nodiscard]] double query(const Eigen::VectorXd& x);
  [[nodiscard]] const std::string& command() const noexcept { return command_; }

 private:
  [[noreturn]] void fail(const std::string& what);
  void shutdown();

  std::string command_;
  pid_t pid_ = -1;
  std::FILE* to_child_ = nullptr;
  std::FILE* from_child_ = nullptr;
  std::string stderr_path_;
  std::mutex mutex_;
};

/// The objective is not shifted (its grid mean would cost thousands of
/// external evaluations); ground truth is taken from `truth` when given.
[[nodiscard]] ObjectiveSpec make_external(const std::string& command, const Domain& domain,
                                         std::optional<GroundTruth> truth = std::nullopt);

}  // namespace rmes::bench
