#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace affine_elastica {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// The area form |a, b|.
inline double det2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Position and derivatives of a curve at one parameter value. d4 is only
/// needed when the parameter is not yet equi-affine arc length.
struct CurveJet {
  Vec2 p = Vec2::Zero();
  Vec2 d1 = Vec2::Zero();
  Vec2 d2 = Vec2::Zero();
  Vec2 d3 = Vec2::Zero();
  Vec2 d4 = Vec2::Zero();
};

using ParametricCurve = std::function<CurveJet(double)>;

/// Uniformly spaced samples of a planar curve, parametrised by equi-affine
/// arc length s. Closed curves hold one period without repeating the first
/// sample: s[i] = s[0] + i * period / size().
struct CurveSamples {
  struct Derivatives {
    std::vector<Vec2> d1, d2, d3;
  };

  std::vector<double> s, x, y;
  bool closed = false;
  std::optional<double> period;
  /// Exact derivatives w.r.t. s when the producer knows them.
  std::optional<Derivatives> derivatives;
  /// Set when a display-only (non-unimodular) map has been applied.
  bool display_normalized = false;
  std::map<std::string, std::string> metadata;

  std::size_t size() const noexcept { return s.size(); }
  double spacing() const;
  Vec2 point(std::size_t i) const { return {x[i], y[i]}; }
  double diameter() const;

  /// Throws Error(InvalidParameter) unless the arrays agree, hold at least
  /// seven samples and are uniformly spaced.
  void validate() const;
};

/// Samples a curve given as a function of equi-affine arc length on n
/// uniform nodes; a closed curve covers [s0, s0 + length) and an open one
/// [s0, s0 + length].
CurveSamples sample_curve(const ParametricCurve& curve, double s0, double length, std::size_t n,
                          bool closed);

/// Applies p -> A p + b. Derivative data is kept only for unimodular A,
/// since otherwise s stops being equi-affine arc length.
CurveSamples transform(const CurveSamples& c, const Mat2& A, const Vec2& b);

/// Image under an invertible affine map, again parametrised by equi-affine
/// arc length: s scales by |det A|^(1/3), derivative data is carried along
/// and the order is reversed when det A < 0 so the orientation stays
/// positive.
CurveSamples affine_image(const CurveSamples& c, const Mat2& A, const Vec2& b);

namespace fd {

/// Finite-difference weights for the derivative of the given order at x0
/// from nodes xs (Fornberg's recursion).
std::vector<double> weights(std::span<const double> xs, double x0, int order);

/// Derivative of uniformly spaced data with width-point stencils of spacing
/// stride*h: central in the interior (or everywhere for periodic data),
/// one-sided at the ends of open data.
std::vector<double> derivative(std::span<const double> f, double h, int order, bool periodic,
                               int stride = 1, int width = 7);

}  // namespace fd

/// Quadrature of uniformly spaced data: trapezoid for periodic data,
/// composite Simpson otherwise.
double integrate(std::span<const double> f, double h, bool periodic);

/// Running integral from the first sample using local quintic interpolation,
/// same length as f.
std::vector<double> cumulative_integral(std::span<const double> f, double h);

}  // namespace affine_elastica
