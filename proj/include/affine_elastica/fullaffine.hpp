#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "affine_elastica/curvature.hpp"
#include "affine_elastica/curve.hpp"

namespace affine_elastica {

/// Full-affine arc length s_F (ds_F = sqrt(kappa) ds, starting at 0) and
/// curvature kappa_F = kappa' / (2 kappa^(3/2)) at the nodes of a curve.
struct FullAffineData {
  std::vector<double> s_F, kappa_F;
  bool closed = false;
  /// Full-affine length of the curve (of one period when closed).
  double length = 0.0;
};

/// Throws NonConvex unless kappa > 0 at every node.
FullAffineData full_affine_invariants(const CurveSamples& c, const FdOptions& opts = {});

/// kappa_F given as a function of s_F, sampled at n uniform nodes of [a, b].
FullAffineData sample_full_affine(const std::function<double(double)>& kappa_F, double a, double b,
                                  std::size_t n);

/// (kappa_F)''' + kappa (kappa_F)' with derivatives in s, at every node.
std::vector<double> sqrt_el_expression(const CurveSamples& c, const FdOptions& opts = {});

/// RMS over the interior nodes of (kappa_F)''' + kappa (kappa_F)', which
/// vanishes on the critical points of the full-affine length.
double el_residual_sqrt(const CurveSamples& c, const FdOptions& opts = {});

/// The same condition written in s_F alone:
/// k''' + 3 k k'' + (k')^2 + (2 k^2 + 1) k' with k = kappa_F. The data are
/// first resampled on a uniform s_F grid. Pointwise values on that grid
/// and the interior RMS.
struct FullAffineFormResidual {
  std::vector<double> s_F, value;
  double rms = 0.0;
};
FullAffineFormResidual full_affine_form_residuals(const FullAffineData& fd);
double el_residual_full_affine_form(const FullAffineData& fd);

/// Least-squares fit kappa_F = A x + B y + C. Critical curves of the
/// full-affine length are W-curves (A = B = 0) or curves whose
/// full-affine curvature is a linear function of the position vector
/// about origin, where A x + B y + C vanishes.
struct LinearFitCertificate {
  bool is_w_curve = false;
  double A = 0.0, B = 0.0, C = 0.0;
  double fit_residual = 0.0;
  std::optional<Vec2> origin;
};
LinearFitCertificate linear_fit_certificate(const CurveSamples& c, const FdOptions& opts = {});

/// Fits (kappa_F)''' + kappa (kappa_F)' = Q (area fixed), = Q kappa (length
/// fixed) and = Q (kappa'' + kappa^2) (total curvature fixed); residuals
/// are interior RMS values.
struct ConstrainedSqrtResiduals {
  double unconstrained = 0.0;
  double area_Q = 0.0, area_residual = 0.0;
  double length_Q = 0.0, length_residual = 0.0;
  double total_curvature_Q = 0.0, total_curvature_residual = 0.0;
};
ConstrainedSqrtResiduals constrained_sqrt_residuals(const CurveSamples& c, const FdOptions& opts = {});

/// The curve with prescribed full-affine curvature on s_F in [a, b], in the
/// gauge kappa = 1, gamma = 0, gamma' = (1, 0), gamma'' = (0, 1) at s_F = 0.
/// Sampled at n nodes uniform in equi-affine arc length with exact jets.
/// Throws BlowUp when kappa escapes to infinity before s_F reaches a or b.
CurveSamples curve_from_full_affine_curvature(const std::function<double(double)>& kappa_F,
                                              double a, double b, std::size_t n);

/// An element of SL(2), with the bi-invariant metric g(v, v) = -det v on
/// its tangent vectors.
struct SL2Point {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;

  Mat2 matrix() const;
  double det() const noexcept { return a * d - b * c; }
  static SL2Point from_matrix(const Mat2& m);
};

enum class SL2Direction { E1, E2, E3 };

/// e1 = diag(1, -1), e2 = [[0, 1], [1, 0]], e3 = [[0, -1], [1, 0]]; e1 and
/// e2 are space-like, e3 is time-like.
Mat2 sl2_basis(SL2Direction e);

/// g(u, v) = -(det(u + v) - det u - det v) / 2.
double sl2_metric(const Mat2& u, const Mat2& v);

/// exp(t v) for traceless v, in closed form. Throws InvalidParameter when v
/// is not traceless.
SL2Point sl2_geodesic(const Mat2& v, double t);
SL2Point sl2_geodesic(SL2Direction e, double t);

/// Equi-affine map p -> L p + translation taking the standard pointed
/// parabola (t, t^2/2), special point t = 0, to the osculating parabola of
/// the curve at node i with special point gamma(s_i).
struct PointedParabola {
  SL2Point linear;
  Vec2 translation = Vec2::Zero();
};
PointedParabola osculating_parabola(const CurveSamples& c, std::size_t i, const FdOptions& opts = {});

/// The osculating parabolic congruence at every node.
struct PointedParabolaPath {
  std::vector<double> t;
  std::vector<SL2Point> linear;
  std::vector<Vec2> translation;
};
PointedParabolaPath congruence_path(const CurveSamples& c, const FdOptions& opts = {});

/// Length of the SL(2) part of the congruence, the integral of
/// sqrt|g(P', P')|. signature is -1 when the velocity is time-like
/// throughout (g < 0, convex curves), +1 when space-like, 0 when mixed.
struct CongruenceLength {
  double length = 0.0;
  int signature = 0;
  bool sign_change = false;
};
CongruenceLength congruence_arclength(const CurveSamples& c, const FdOptions& opts = {});

}  // namespace affine_elastica
