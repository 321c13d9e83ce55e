#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace windfc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument or input file was violated.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Network training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int epoch, int member = -1)
      : Error(what), epoch_(epoch), member_(member) {}

  int epoch() const noexcept { return epoch_; }
  /// Ensemble member index, or -1 for a standalone network.
  int member() const noexcept { return member_; }

 private:
  int epoch_;
  int member_;
};

/// Wraps a failure inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, std::string hint)
      : Error("[" + stage + "] " + what + (hint.empty() ? "" : " (hint: " + hint + ")")),
        stage_(std::move(stage)),
        hint_(std::move(hint)) {}

  const std::string& stage() const noexcept { return stage_; }
  const std::string& hint() const noexcept { return hint_; }

 private:
  std::string stage_;
  std::string hint_;
};

}  // namespace windfc
