#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgecache {

/// Input text that cannot be turned into a trace, config or model.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Regularized-SVD training produced non-finite factors or a rising loss.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"), epoch_(epoch) {}

  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace edgecache
