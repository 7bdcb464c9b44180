#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace affine_elastica {

enum class ErrorCode {
  DegenerateDiscriminant,
  NearPole,
  InflectionPoint,
  NotCritical,
  ZeroC,
  NegativeCurvature,
  NonConvex,
  BranchUnavailable,
  InvalidParameter,
  PathThroughZero,
  GridHitsPole,
  UnimodularizationFailed,
  NoSuchC,
  NotBracketed,
  EllipseFitFailed,
  BlowUp,
  ParseError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace affine_elastica
