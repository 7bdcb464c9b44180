#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "affine_elastica/curve.hpp"

namespace affine_elastica {

/// Equi-affine tangent T = gamma', normal N = gamma'' and curvature
/// kappa = |N, N'|, so that N' = -kappa T.
struct FrameField {
  std::vector<Vec2> T, N;
  std::vector<double> kappa;
};

/// Decomposition P = -rho N + phi T of the position vector about an origin,
/// with rho = |P, T| and phi = |P, N|.
struct SupportData {
  std::vector<double> rho, phi;
};

struct FdOptions {
  /// Stencil stride for derivatives taken from positions alone. Zero picks a
  /// stride that balances truncation against round-off for curvature of
  /// order one.
  int stride = 0;
};

/// Returns the stride actually used by the derivative routines for c.
int effective_stride(const CurveSamples& c, const FdOptions& opts = {});

/// Number of nodes at each end of an open curve that residual norms skip.
std::size_t boundary_margin(const CurveSamples& c, const FdOptions& opts = {});

/// Resamples a curve given with an arbitrary parameter on [t0, t1] at n
/// nodes uniform in equi-affine arc length. The jets must carry four
/// derivatives. A negatively oriented curve is traversed backwards.
/// Throws Error(InflectionPoint) when |gamma_t, gamma_tt| changes sign or
/// becomes negligible.
CurveSamples reparametrize_equiaffine(const ParametricCurve& curve, double t0, double t1,
                                      std::size_t n, bool closed);

/// The same for sampled points, taken as uniformly spaced in their own
/// parameter. Closed input must not repeat the first point. n_out = 0 keeps
/// the input count.
CurveSamples reparametrize_equiaffine(std::span<const Vec2> points, bool closed,
                                      std::size_t n_out = 0);

FrameField frame_and_curvature(const CurveSamples& c, const FdOptions& opts = {});

/// First and second s-derivatives of kappa.
struct CurvatureJet {
  std::vector<double> kappa, d1, d2;
};
CurvatureJet curvature_jet(const CurveSamples& c, const FdOptions& opts = {});

SupportData support_function(const CurveSamples& c, const Vec2& origin,
                             const FdOptions& opts = {});

/// Origin about which rho = kappa / C for a curve with kappa'' + kappa^2 = C.
/// Throws NotCritical when the fit residual exceeds tol * max(1, |C|) and
/// ZeroC when |C| is negligible.
Vec2 translate_to_canonical(const CurveSamples& c, double tol = 1e-4, const FdOptions& opts = {});

/// A function of curvature with its first three derivatives.
struct CurvatureFunction {
  std::function<double(double)> f, d1, d2, d3;
};

struct GeneralResidual {
  double A = 0.0;
  double B = 0.0;
  double residual = 0.0;
};

/// Fits F'''(k) k'^2 + F''(k) k'' + 4 F'(k) k - 2 F(k) by A x' + B y' in
/// least squares; residual is the RMS misfit.
GeneralResidual el_residual_general(const CurveSamples& c, const CurvatureFunction& F,
                                    const FdOptions& opts = {});

struct AreaResidual {
  double C = 0.0;
  double residual = 0.0;
};

/// Fits kappa'' + kappa^2 by a constant.
AreaResidual el_residual_area_constrained(const CurveSamples& c, const FdOptions& opts = {});

struct AreaLengthResidual {
  double C = 0.0;
  double A = 0.0;
  double residual = 0.0;
  /// Set when kappa is constant and only C + A kappa is determined; (C, A)
  /// is then the minimal-norm solution.
  bool underdetermined = false;
};

/// Fits kappa'' + kappa^2 by C + A kappa.
AreaLengthResidual el_residual_area_and_length(const CurveSamples& c, const FdOptions& opts = {});

struct Functionals {
  double length = 0.0;
  double total_curvature = 0.0;
  /// Enclosed area for closed curves, positive for counter-clockwise ones.
  std::optional<double> area;
  /// Full-affine arc length, present only when kappa > 0 everywhere.
  std::optional<double> full_affine_length;
};

Functionals functionals(const CurveSamples& c, const FdOptions& opts = {});

/// Integral of sqrt(kappa) ds. Throws NegativeCurvature unless kappa > 0.
double full_affine_length(const CurveSamples& c, const FdOptions& opts = {});

struct SextacticCount {
  int sign_changes = 0;
  /// kappa' vanishes identically up to noise, so every point is sextactic.
  bool constant_curvature = false;
};

/// Counts sign changes of kappa' (cyclically for closed curves).
SextacticCount sextactic_points(const CurveSamples& c, const FdOptions& opts = {});

/// Root mean square of v over the nodes not excluded by the boundary margin.
double interior_rms(const CurveSamples& c, std::span<const double> v, const FdOptions& opts = {});

}  // namespace affine_elastica
