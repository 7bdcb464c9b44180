#pragma once

#include <optional>
#include <string_view>

#include "affine_elastica/elliptic.hpp"

namespace affine_elastica {

enum class CaseTag { A1, A2, A3, B1, B2, B3, C1, C2, C3, C4, C5, Da, Dc, E_case, F, G, Ellipse };

/// Which component of the phase-plane cubic (kappa')^2 = -2/3 kappa^3 +
/// 6 g2 kappa - 36 g3 the curvature runs along.
enum class Branch { Closed, Open };

std::string_view tag_name(CaseTag tag);
/// Parses names such as "A1", "A.1", "Da" or "ellipse"; empty on failure.
std::optional<CaseTag> parse_tag(std::string_view name);
std::string_view branch_name(Branch b);
std::optional<Branch> parse_branch(std::string_view name);

/// Curvature values where the phase cubic meets the kappa axis, named as in
/// the case analysis. Only the fields relevant to the tag are set.
struct CaseParams {
  std::optional<double> q, Q;  // A, B (B normalised by |P|)
  std::optional<double> P;     // B (raw), C
  std::optional<double> tau;   // C
  std::optional<double> E;     // D, E, ellipse
  std::optional<double> g3;    // F
};

struct CaseLabel {
  CaseTag tag = CaseTag::G;
  Branch branch = Branch::Open;
  Invariants invariants;
  CaseParams params;
};

/// Assigns the case. Throws BranchUnavailable for the closed branch when
/// Delta < 0, and InvalidParameter when a Case B curve has q at the
/// unreachable boundary 1/2.
CaseLabel classify(const Invariants& inv, Branch branch);

struct NormalForm {
  /// lambda with kappa -> lambda^2 kappa, s -> s / lambda.
  double scale = 1.0;
  CaseLabel normalized;
};

/// The rescaling that brings the defining parameter to +-1 (q for A1 and
/// A3, Q for A2, P for B and C, tau for C3, E for D/E, g3 for F).
NormalForm rescale_to_normal_form(const Invariants& inv, const CaseLabel& label);

/// Invariants after kappa -> lambda^2 kappa.
Invariants rescale(const Invariants& inv, double lambda);

/// Numeric tolerances used by the classifier.
inline constexpr double kZeroRootTol = 1e-10;

}  // namespace affine_elastica
