#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace pcm {

// All recoverable failures carry a stable machine-readable code (e.g.
// "BreakpointOrderError") plus an optional numeric witness such as the x
// where a range check failed. The CLI maps these to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message,
        std::optional<double> witness = std::nullopt)
      : std::runtime_error(message), code_(std::move(code)), witness_(witness) {}

  const std::string& code() const noexcept { return code_; }
  std::optional<double> witness() const noexcept { return witness_; }

 private:
  std::string code_;
  std::optional<double> witness_;
};

}  // namespace pcm
