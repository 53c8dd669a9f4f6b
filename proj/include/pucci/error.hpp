#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pucci {

enum class ErrorKind {
  InvalidArgument,
  NonFinite,
  NoBracket,
  HorizonExceeded,
  ViolationFound,
  RootLost,
  DegenerateZero,
  DimensionMismatch,
  NoConvergence,
  ConeEscape,
  NonPositiveInput,
  Violation,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::HorizonExceeded: return "HorizonExceeded";
    case ErrorKind::ViolationFound: return "ViolationFound";
    case ErrorKind::RootLost: return "RootLost";
    case ErrorKind::DegenerateZero: return "DegenerateZero";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::ConeEscape: return "ConeEscape";
    case ErrorKind::NonPositiveInput: return "NonPositiveInput";
    case ErrorKind::Violation: return "Violation";
  }
  return "Unknown";
}

/// Single exception type for the library. `kind` says what went wrong;
/// `index` optionally names the offending node, spectral index or step.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        index_(index) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  ErrorKind kind_;
  std::optional<std::size_t> index_;
};

}  // namespace pucci
