#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lte {

// Shape or argument contract violated by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or otherwise unusable numbers.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Autograd misuse: repeated backward, backward through a released graph.
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::vector<std::string> keys = {})
      : std::runtime_error(what), keys_(std::move(keys)) {}

  // Offending keys, when the error is a schema violation.
  const std::vector<std::string>& keys() const noexcept { return keys_; }

 private:
  std::vector<std::string> keys_;
};

class CheckpointError : public IoError {
 public:
  using IoError::IoError;
};

class CrcMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class MissingTensorError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class UnsupportedVersionError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace lte
