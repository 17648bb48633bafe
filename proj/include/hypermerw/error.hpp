#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypermerw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (bad vectors, bad keys, bad documents).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Two tensors that must share a support do not.
class SupportMismatch : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The constraint set is empty (or numerically so). `nodes` lists the
/// 0-based nodes whose constraint could not be met, when known.
class InfeasibleConstraints : public Error {
 public:
  InfeasibleConstraints(const std::string& what, std::vector<std::uint32_t> nodes = {})
      : Error(what), nodes_(std::move(nodes)) {}
  const std::vector<std::uint32_t>& nodes() const noexcept { return nodes_; }

 private:
  std::vector<std::uint32_t> nodes_;
};

}  // namespace hypermerw
