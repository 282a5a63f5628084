#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace orec {

/// A problem instance falls outside the hypotheses of every known closed form.
class RegimeError : public std::domain_error {
 public:
  RegimeError(std::string hypothesis, const std::string& detail)
      : std::domain_error("hypothesis violated: " + hypothesis + " (" + detail + ")"),
        hypothesis_(std::move(hypothesis)) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

/// Malformed field/method/config file. `offset` is a byte offset into the
/// input (or into the decoded payload when the payload itself is bad).
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace orec
