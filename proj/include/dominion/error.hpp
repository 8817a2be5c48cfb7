#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dominion {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  SingularP,
  SingularD,
  SingularDz,
  NonpositiveEps,
  NoConvergence,
  InfeasibleAtFloor,
  ParseError,
  EvalError,
  NotScalarParameterized,
  NewtonFailure,
  NonFinite,
  SamplingExhausted,
  ConfigError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by the expression parser. `position` is a 0-based character offset.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::vector<std::string> expected, const std::string& what)
      : Error(ErrorCode::ParseError, what + " at position " + std::to_string(position)),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

}  // namespace dominion
