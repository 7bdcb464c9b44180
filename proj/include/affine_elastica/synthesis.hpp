#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "affine_elastica/classifier.hpp"
#include "affine_elastica/curve.hpp"
#include "affine_elastica/elliptic.hpp"

namespace affine_elastica {

/// Data of the Lame construction: kappa(s) = -6 wp(s - c0), and c solves
/// wp(c) = -g3/g2. z0 is the base point of the reduction-of-order integral.
struct LameSolutionParams {
  Invariants inv;
  ComplexPoint c;
  ComplexPoint c0;
  ComplexPoint z0;
};

/// Solves wp(c) = value on the lines where wp is real: d, d i, w1 + d i and
/// w2 + d. On the line w1 + d i the representative with d <= 0 is returned.
/// Throws NoSuchC when no root is bracketed.
ComplexPoint find_c(const Weierstrass& w, double value);

/// Parameters for a generic label (A1, A3, B1, B3, C1, C2, C4, C5).
LameSolutionParams lame_params(const CaseLabel& label);

/// sigma(z + c)/sigma(z) exp(k z) with k = -wp'(c)/(2 wp(c)) - zeta(c).
/// Its derivative is phi1; the function itself solves xi''' = 6 wp xi'.
ComplexPoint lame_primitive(ComplexPoint z, const LameSolutionParams& p);
ComplexPoint lame_phi1(ComplexPoint z, const LameSolutionParams& p);
/// phi1(z) * int_{z0}^{z} phi1^-2, so that phi1 phi2' - phi2 phi1' = 1.
/// The path is the straight segment or, when phi1 comes close to zero on
/// it, a detour through the upper or lower half plane. Throws
/// PathThroughZero when phi1 nearly vanishes on every candidate path.
ComplexPoint lame_phi2(ComplexPoint z, const LameSolutionParams& p);

/// A critical curve with exact jets in equi-affine arc length.
struct AnalyticCurve {
  ParametricCurve curve;
  std::function<double(double)> kappa;
  /// Curvature poles on the real s axis: origin + k * spacing (k in Z), or
  /// a single pole when spacing is absent.
  std::optional<double> pole_origin;
  std::optional<double> pole_spacing;
  /// Period of the curvature, when periodic.
  std::optional<double> kappa_period;
  /// A convenient start point: a curvature extremum away from the poles.
  double s_ref = 0.0;
  std::map<std::string, std::string> metadata;
};

/// The curve of a label, normalised so that |x' y'' - x'' y'| = 1.
/// Generic cases use the Lame functions (both real and imaginary part of
/// one solution when they are independent, otherwise the best pair out of
/// two solutions); A2, B2, C3 use +-sqrt|kappa| (1, s) with the sign change
/// built in; D, E, F, G and the ellipse use closed forms.
AnalyticCurve analytic_curve(const CaseLabel& label);

/// Curves of total curvature critical under fixed length:
/// kappa = -6 wp(s - c0) + A/2 with g2 = A^2/12.
AnalyticCurve analytic_length_constrained(double A, double g3, ComplexPoint c0);

struct SynthesisGrid {
  double s0 = 0.0;
  double length = 1.0;
  std::size_t n = 1000;
  /// Treat [s0, s0 + length) as one period of a closed curve.
  bool closed = false;
};

/// A window for sampling a: one cell between consecutive poles with a fifth
/// of the spacing left free at each end, a stretch after a single pole, one
/// curvature period, or [s_ref - 3, s_ref + 3]. Closed only for the ellipse.
SynthesisGrid default_grid(const AnalyticCurve& a, std::size_t n);

/// Throws GridHitsPole when [s0, s0 + length] contains a curvature pole.
CurveSamples sample_analytic(const AnalyticCurve& a, const SynthesisGrid& grid);
CurveSamples synthesize(const CaseLabel& label, const SynthesisGrid& grid);
CurveSamples synthesize_length_constrained(double A, double g3, ComplexPoint c0,
                                           const SynthesisGrid& grid);

/// The closed-curve data for q = 1: c = w1 + d i and the rotation number
/// lhs, which has to equal n/m.
struct ClosureSolution {
  int m = 0;
  int n = 0;
  double Q = 0.0;
  Invariants inv;
  LatticeData lattice;
  double d = 0.0;
  double lhs = 0.0;
};

/// Rotation number of the A1 curve with q = 1, max curvature Q > 1.
/// Throws InvalidParameter for Q <= 1 and NoSuchC if c cannot be found.
double closure_lhs(double Q);

/// closure_lhs together with d = Im c.
struct ClosureSample {
  double Q = 0.0, lhs = 0.0, d = 0.0;
};
ClosureSample closure_sample(double Q);

/// Finds Q with closure_lhs(Q) = n/m by scanning Q over [1 + 1e-3, 1e3] on a
/// log grid and refining the first sign change. Throws NotBracketed.
ClosureSolution solve_closure(int m, int n);

/// Smallest s-period of the closed curve: 2 m w1 for even n, else 4 m w1.
double closure_period(const ClosureSolution& sol);
CaseLabel closure_label(const ClosureSolution& sol);

/// For q = -1 and Q > 2: (w1 sqrt(-g3/g2) - zeta(w1) d + w1 zeta(w2 + d)
/// - w1 zeta(w2)) * 2/pi with c = w2 + d. The rotation quantity of the A3
/// curve is 1 + i times this number, so the curve closes only if it is 0.
double a3_nonperiodicity(double Q);

/// Least-squares affine map with dst ~ A src + b.
struct AffineMap {
  Mat2 A = Mat2::Identity();
  Vec2 b = Vec2::Zero();
};
AffineMap fit_affine_map(std::span<const Vec2> src, std::span<const Vec2> dst);

/// Points of maximal curvature, located to sub-sample accuracy.
std::vector<Vec2> curvature_maxima(const CurveSamples& c);

/// Maps the ellipse through the curvature maxima onto a circle of the same
/// area centred at the origin. The result is flagged display_normalized.
/// With three or four distinct maxima on a closed curve the ellipse is the
/// one preserved by the affine map taking each maximum to the next.
/// Curves of constant curvature are returned unchanged. Throws
/// EllipseFitFailed when the maxima do not determine an ellipse.
CurveSamples euclidean_display_transform(const CurveSamples& c, const ClosureSolution& sol);

}  // namespace affine_elastica
