#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace npn {

enum class ErrorKind {
  NotPositiveDefinite,
  NoConvergence,
  DomainError,
  DegenerateColumn,
  SingularScatter,
  InsufficientSamples,
  DegenerateDraw,
  EmptyGroup,
  ParseError,
  NonFiniteValue,
  EmptyFile,
  UsageError,
};

inline constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::DegenerateColumn: return "DegenerateColumn";
    case ErrorKind::SingularScatter: return "SingularScatter";
    case ErrorKind::InsufficientSamples: return "InsufficientSamples";
    case ErrorKind::DegenerateDraw: return "DegenerateDraw";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::UsageError: return "UsageError";
  }
  return "Unknown";
}

// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace npn
