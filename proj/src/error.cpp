#include "affine_elastica/error.hpp"

namespace affine_elastica {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DegenerateDiscriminant: return "DegenerateDiscriminant";
    case ErrorCode::NearPole: return "NearPole";
    case ErrorCode::InflectionPoint: return "InflectionPoint";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::ZeroC: return "ZeroC";
    case ErrorCode::NegativeCurvature: return "NegativeCurvature";
    case ErrorCode::NonConvex: return "NonConvex";
    case ErrorCode::BranchUnavailable: return "BranchUnavailable";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::PathThroughZero: return "PathThroughZero";
    case ErrorCode::GridHitsPole: return "GridHitsPole";
    case ErrorCode::UnimodularizationFailed: return "UnimodularizationFailed";
    case ErrorCode::NoSuchC: return "NoSuchC";
    case ErrorCode::NotBracketed: return "NotBracketed";
    case ErrorCode::EllipseFitFailed: return "EllipseFitFailed";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace affine_elastica
