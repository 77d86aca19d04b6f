#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rcon {

/// Bad caller input: wrong dimensions, invalid ids, malformed graphs.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A statistical check was asked to work from fewer than two replicates.
class InsufficientReplicates : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A matrix that had to be positive definite (or inside the model cone)
/// was not.
class NotPositiveDefinite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a result (e.g. singular Fisher
/// information, no contributions for a colour class).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One or more per-vertex estimates failed. failures holds (vertex id,
/// message) pairs with 0-based ids; what() lists them 1-based.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(std::vector<std::pair<int, std::string>> failures)
      : std::runtime_error(describe(failures)), failures_(std::move(failures)) {}

  const std::vector<std::pair<int, std::string>>& failures() const { return failures_; }

 private:
  static std::string describe(const std::vector<std::pair<int, std::string>>& failures) {
    std::string msg = "estimation failed at " + std::to_string(failures.size()) + " vertex(es):";
    for (const auto& [v, what] : failures) msg += " [vertex " + std::to_string(v + 1) + ": " + what + "]";
    return msg;
  }

  std::vector<std::pair<int, std::string>> failures_;
};

}  // namespace rcon
