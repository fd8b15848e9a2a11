#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qualest {

enum class ErrorKind {
  InvalidArgument,
  InvalidDesign,
  DegenerateAttribute,
  DegenerateAuxiliary,
  DegenerateSample,
  DegenerateClass,
  SingularTransform,
  SingularSystem,
  ZeroSampleMean,
  EnumerationTooLarge,
  InfeasibleTargets,
  ParseError,
  UnknownPreset,
  UnknownFormat,
};

[[nodiscard]] std::string_view to_string(ErrorKind kind) noexcept;

// All library failures are reported through this one exception type; callers
// branch on kind() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace qualest
