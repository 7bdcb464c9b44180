#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "affine_elastica/curvature.hpp"
#include "affine_elastica/error.hpp"

using namespace affine_elastica;
using std::numbers::pi;

namespace {

ParametricCurve ellipse(double a, double b) {
  return [a, b](double t) {
    CurveJet j;
    const double c = std::cos(t), s = std::sin(t);
    j.p = {a * c, b * s};
    j.d1 = {-a * s, b * c};
    j.d2 = {-a * c, -b * s};
    j.d3 = {a * s, -b * c};
    j.d4 = {a * c, b * s};
    return j;
  };
}

// r(theta) = 1 + eps cos(k theta), strictly convex for small eps.
std::vector<Vec2> wavy_points(double eps, int k, std::size_t n) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * pi * static_cast<double>(i) / static_cast<double>(n);
    const double r = 1.0 + eps * std::cos(k * t);
    pts[i] = {r * std::cos(t), r * std::sin(t)};
  }
  return pts;
}

std::vector<Vec2> points_of(const ParametricCurve& g, double t0, double t1, std::size_t n) {
  std::vector<Vec2> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = g(t0 + (t1 - t0) * static_cast<double>(i) / n).p;
  return pts;
}

// Rotation * diag(l, 1/l) * rotation with l in [1/2, 2].
Mat2 random_unimodular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  std::uniform_real_distribution<double> stretch(-std::log(2.0), std::log(2.0));
  auto rot = [](double a) {
    Mat2 R;
    R << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    return R;
  };
  const double l = std::exp(stretch(rng));
  return rot(angle(rng)) * Eigen::Vector2d(l, 1.0 / l).asDiagonal() * rot(angle(rng));
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(FiniteDifferences, FornbergReproducesCentralWeights) {
  const std::vector<double> xs{-3, -2, -1, 0, 1, 2, 3};
  const auto w = fd::weights(xs, 0.0, 1);
  const double expected[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60};
  for (int i = 0; i < 7; ++i) EXPECT_NEAR(w[i], expected[i], 1e-14);
  const auto w2 = fd::weights(xs, 0.0, 2);
  EXPECT_NEAR(w2[3], -49.0 / 18, 1e-13);
}

TEST(FiniteDifferences, DerivativesOfSineOpenAndPeriodic) {
  const std::size_t n = 400;
  const double h = 2.0 * pi / n;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::sin(h * i);
  for (bool periodic : {true, false}) {
    const auto d1 = fd::derivative(f, h, 1, periodic);
    const auto d3 = fd::derivative(f, h, 3, periodic);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(d1[i], std::cos(h * i), 1e-9);
      EXPECT_NEAR(d3[i], -std::cos(h * i), periodic ? 1e-6 : 1e-4);
    }
  }
}

TEST(Quadrature, ExactAndSpectralCases) {
  std::vector<double> f(101);
  const double h = 0.02;
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::pow(h * i, 3);
  EXPECT_NEAR(integrate(f, h, false), 0.25 * std::pow(2.0, 4), 1e-12);
  f.pop_back();
  EXPECT_NEAR(integrate(f, h, false), 0.25 * std::pow(1.98, 4), 1e-12);

  std::vector<double> g(64);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::exp(std::cos(2 * pi * i / 64.0));
  EXPECT_NEAR(integrate(g, 2 * pi / 64, true), 2 * pi * std::cyl_bessel_i(0.0, 1.0), 1e-13);

  std::vector<double> c(200);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = std::cos(0.01 * i);
  const auto cum = cumulative_integral(c, 0.01);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(cum[i], std::sin(0.01 * i), 1e-11);
}

TEST(CurveSamples, ValidationRejectsBadInput) {
  CurveSamples c;
  c.s = {0, 1, 2};
  c.x = c.y = {0, 0, 0};
  EXPECT_THROW(c.validate(), Error);
  c.s = {0, 1, 2, 3, 4, 5, 7};
  c.x = c.y = std::vector<double>(7, 0.0);
  EXPECT_THROW(c.validate(), Error);
}

TEST(Reparametrize, UnitCircleHasLengthTwoPiAndUnitCurvature) {
  // Non-unit speed on purpose: t in [0, 1].
  ParametricCurve g = [](double t) {
    const ParametricCurve e = ellipse(1, 1);
    CurveJet j = e(2 * pi * t);
    const double w = 2 * pi;
    j.d1 *= w;
    j.d2 *= w * w;
    j.d3 *= w * w * w;
    j.d4 *= w * w * w * w;
    return j;
  };
  const auto c = reparametrize_equiaffine(g, 0.0, 1.0, 512, true);
  EXPECT_NEAR(*c.period, 2 * pi, 1e-12);
  const auto f = frame_and_curvature(c);
  for (double k : f.kappa) EXPECT_NEAR(k, 1.0, 1e-12);
}

TEST(Reparametrize, EllipseCurvatureAndLengthFollowScaling) {
  const double a = 2.0, b = 0.5;
  const auto c = reparametrize_equiaffine(ellipse(a, b), 0.0, 2 * pi, 1024, true);
  EXPECT_NEAR(*c.period, 2 * pi * std::cbrt(a * b), 1e-12);
  const auto f = frame_and_curvature(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(f.kappa[i], std::pow(a * b, -2.0 / 3.0), 1e-12);
    EXPECT_NEAR(det2(f.T[i], f.N[i]), 1.0, 1e-12);
  }
}

TEST(Reparametrize, ParabolaHasZeroCurvature) {
  ParametricCurve g = [](double t) {
    CurveJet j;
    j.p = {t, 0.5 * t * t};
    j.d1 = {1, t};
    j.d2 = {0, 1};
    return j;
  };
  const auto c = reparametrize_equiaffine(g, -1.0, 1.0, 201, false);
  EXPECT_NEAR(c.s.back(), 2.0, 1e-13);
  for (double k : frame_and_curvature(c).kappa) EXPECT_NEAR(k, 0.0, 1e-13);
  const auto pts = points_of(g, -1.0, 1.0, 2001);
  const auto d = reparametrize_equiaffine(pts, false, 501);
  const auto kd = frame_and_curvature(d).kappa;
  for (std::size_t i = 10; i + 10 < kd.size(); ++i) EXPECT_NEAR(kd[i], 0.0, 1e-6);
}

TEST(Reparametrize, ClockwiseCurveIsReversed) {
  ParametricCurve g = [](double t) {
    CurveJet j = ellipse(1, 1)(-t);
    j.d1 = -j.d1;
    j.d3 = -j.d3;
    return j;
  };
  const auto c = reparametrize_equiaffine(g, 0.0, 2 * pi, 128, true);
  for (double k : frame_and_curvature(c).kappa) EXPECT_NEAR(k, 1.0, 1e-12);
}

TEST(Reparametrize, InflectionIsRejected) {
  ParametricCurve g = [](double t) {
    CurveJet j;
    j.p = {t, t * t * t};
    j.d1 = {1, 3 * t * t};
    j.d2 = {0, 6 * t};
    j.d3 = {0, 6};
    return j;
  };
  try {
    reparametrize_equiaffine(g, -1.0, 1.0, 100, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InflectionPoint);
  }
  EXPECT_THROW(reparametrize_equiaffine(points_of(g, -1.0, 1.0, 400), false), Error);
}

TEST(Reparametrize, SampledCircleMatchesAnalyticValues) {
  const auto pts = points_of(ellipse(1, 1), 0.0, 2 * pi, 2000);
  const auto c = reparametrize_equiaffine(pts, true);
  EXPECT_NEAR(*c.period, 2 * pi, 1e-10);
  const auto f = frame_and_curvature(c);
  for (double k : f.kappa) EXPECT_NEAR(k, 1.0, 1e-6);
  const auto fn = functionals(c);
  EXPECT_NEAR(fn.length, 2 * pi, 1e-10);
  EXPECT_NEAR(fn.total_curvature, 2 * pi, 1e-6);
  EXPECT_NEAR(*fn.area, pi, 1e-5);
  EXPECT_NEAR(*fn.full_affine_length, 2 * pi, 1e-6);
}

TEST(Reparametrize, Idempotent) {
  const auto pts = wavy_points(0.05, 3, 2000);
  const auto once = reparametrize_equiaffine(pts, true);
  std::vector<Vec2> again_pts(once.size());
  for (std::size_t i = 0; i < once.size(); ++i) again_pts[i] = once.point(i);
  const auto twice = reparametrize_equiaffine(again_pts, true);
  EXPECT_NEAR(*once.period, *twice.period, 1e-8);
  EXPECT_LT(max_abs_diff(once.x, twice.x), 1e-8);
  EXPECT_LT(max_abs_diff(once.y, twice.y), 1e-8);
}

TEST(Frame, StructureEquationsHoldOnEllipse) {
  const auto pts = points_of(ellipse(1.5, 0.7), 0.0, 2 * pi, 3000);
  const auto c = reparametrize_equiaffine(pts, true);
  const auto f = frame_and_curvature(c);
  const double h = c.spacing();
  std::vector<double> nx(c.size()), ny(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    nx[i] = f.N[i].x();
    ny[i] = f.N[i].y();
  }
  const auto nx1 = fd::derivative(nx, h, 1, true);
  const auto ny1 = fd::derivative(ny, h, 1, true);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(det2(f.T[i], f.N[i]), 1.0, 1e-8);
    EXPECT_NEAR(nx1[i] + f.kappa[i] * f.T[i].x(), 0.0, 1e-6);
    EXPECT_NEAR(ny1[i] + f.kappa[i] * f.T[i].y(), 0.0, 1e-6);
  }
}

TEST(SupportFunction, CircleAndEllipse) {
  const auto circle = reparametrize_equiaffine(ellipse(1, 1), 0.0, 2 * pi, 256, true);
  const auto sc = support_function(circle, Vec2::Zero());
  for (std::size_t i = 0; i < circle.size(); ++i) {
    EXPECT_NEAR(sc.rho[i], 1.0, 1e-13);
    EXPECT_NEAR(sc.phi[i], 0.0, 1e-13);
  }
  const double a = 3.0, b = 0.4;
  const auto e = reparametrize_equiaffine(ellipse(a, b), 0.0, 2 * pi, 1024, true);
  const auto se = support_function(e, Vec2::Zero());
  const auto f = frame_and_curvature(e);
  const auto rho2 = fd::derivative(se.rho, e.spacing(), 2, true);
  for (std::size_t i = 0; i < e.size(); ++i) {
    EXPECT_NEAR(se.rho[i], std::pow(a * b, 2.0 / 3.0), 1e-12);
    EXPECT_NEAR(rho2[i] + f.kappa[i] * se.rho[i] - 1.0, 0.0, 1e-9);
    const Vec2 P = -se.rho[i] * f.N[i] + se.phi[i] * f.T[i];
    EXPECT_NEAR((P - e.point(i)).norm(), 0.0, 1e-12);
  }
}

TEST(SupportFunction, OffCentreOriginSatisfiesOde) {
  const auto c = reparametrize_equiaffine(wavy_points(0.01, 5, 4000), true);
  const auto sd = support_function(c, Vec2(0.3, -0.2));
  const auto f = frame_and_curvature(c);
  const auto rho2 = fd::derivative(sd.rho, c.spacing(), 2, true, effective_stride(c), 11);
  std::vector<double> r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) r[i] = rho2[i] + f.kappa[i] * sd.rho[i] - 1.0;
  EXPECT_LT(interior_rms(c, r), 1e-6);
}

TEST(TranslateToCanonical, CircleCentre) {
  auto g = ellipse(1, 1);
  ParametricCurve shifted = [g](double t) {
    CurveJet j = g(t);
    j.p += Vec2(2.0, -1.0);
    return j;
  };
  const auto c = reparametrize_equiaffine(shifted, 0.0, 2 * pi, 256, true);
  const Vec2 o = translate_to_canonical(c);
  EXPECT_NEAR(o.x(), 2.0, 1e-12);
  EXPECT_NEAR(o.y(), -1.0, 1e-12);
  EXPECT_NEAR(el_residual_area_constrained(c).C, 1.0, 1e-12);
}

TEST(TranslateToCanonical, RejectsNonCriticalCurve) {
  const auto c = reparametrize_equiaffine(wavy_points(0.05, 3, 2000), true);
  try {
    translate_to_canonical(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotCritical);
  }
}

TEST(Residuals, AreaConstrainedCircleAndNegativeControl) {
  const auto circle = reparametrize_equiaffine(ellipse(1, 1), 0.0, 2 * pi, 512, true);
  const auto r = el_residual_area_constrained(circle);
  EXPECT_NEAR(r.C, 1.0, 1e-10);
  EXPECT_LT(r.residual, 1e-8);
  const auto wavy = reparametrize_equiaffine(wavy_points(0.06, 3, 2000), true);
  EXPECT_GT(el_residual_area_constrained(wavy).residual, 0.1);
  EXPECT_GT(el_residual_area_and_length(wavy).residual, 0.1);
}

TEST(Residuals, AreaAndLengthCircleIsUnderdetermined) {
  const auto circle = reparametrize_equiaffine(ellipse(1, 1), 0.0, 2 * pi, 512, true);
  const auto r = el_residual_area_and_length(circle);
  EXPECT_TRUE(r.underdetermined);
  EXPECT_NEAR(r.C + r.A, 1.0, 1e-10);
  EXPECT_NEAR(r.C, 0.5, 1e-10);
  EXPECT_LT(r.residual, 1e-8);
}

TEST(Residuals, GeneralFunctionals) {
  const CurvatureFunction linear{[](double k) { return k; }, [](double) { return 1.0; },
                                 [](double) { return 0.0; }, [](double) { return 0.0; }};
  const CurvatureFunction root{[](double k) { return std::sqrt(k); },
                               [](double k) { return 0.5 / std::sqrt(k); },
                               [](double k) { return -0.25 * std::pow(k, -1.5); },
                               [](double k) { return 0.375 * std::pow(k, -2.5); }};
  const auto circle = reparametrize_equiaffine(ellipse(1, 1), 0.0, 2 * pi, 512, true);
  EXPECT_NEAR(el_residual_general(circle, linear).residual, 2.0, 1e-10);
  const auto e = reparametrize_equiaffine(ellipse(2, 0.5), 0.0, 2 * pi, 512, true);
  const auto r = el_residual_general(e, root);
  EXPECT_LT(r.residual, 1e-6);
  EXPECT_NEAR(r.A, 0.0, 1e-6);
  EXPECT_NEAR(r.B, 0.0, 1e-6);
}

TEST(Functionals, EllipseAttainsIsoperimetricEquality) {
  const auto c = reparametrize_equiaffine(ellipse(2, 0.5), 0.0, 2 * pi, 2048, true);
  const auto f = functionals(c);
  EXPECT_NEAR(f.length * f.total_curvature, 4 * pi * pi, 1e-6);
  EXPECT_NEAR(*f.area, pi, 1e-12);
}

TEST(Functionals, NegativeCurvatureReported) {
  ParametricCurve hyp = [](double t) {
    CurveJet j;
    j.p = {std::cosh(t), std::sinh(t)};
    j.d1 = {std::sinh(t), std::cosh(t)};
    j.d2 = j.p;
    j.d3 = j.d1;
    j.d4 = j.p;
    return j;
  };
  const auto c = reparametrize_equiaffine(hyp, -1.0, 1.0, 201, false);
  for (double k : frame_and_curvature(c).kappa) EXPECT_NEAR(k, -1.0, 1e-12);
  EXPECT_FALSE(functionals(c).full_affine_length.has_value());
  try {
    full_affine_length(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeCurvature);
  }
}

TEST(Sextactic, ConvexCurvesHaveAtLeastFour) {
  const auto circle = reparametrize_equiaffine(ellipse(1, 1), 0.0, 2 * pi, 256, true);
  EXPECT_TRUE(sextactic_points(circle).constant_curvature);
  for (int k : {2, 3, 5}) {
    const auto c = reparametrize_equiaffine(wavy_points(0.02, k, 3000), true);
    const auto count = sextactic_points(c);
    EXPECT_FALSE(count.constant_curvature);
    EXPECT_GE(count.sign_changes, 4);
  }
}

TEST(Property, EquiAffineInvariance) {
  std::mt19937_64 rng(20241016);
  std::uniform_real_distribution<double> frac(0.05, 0.3);
  std::uniform_int_distribution<int> harm(2, 4);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  for (int trial = 0; trial < 8; ++trial) {
    // r = 1 + eps cos(k theta) stays convex while eps (1 + k^2) < 1.
    const int k = harm(rng);
    const auto pts = wavy_points(frac(rng) / (1.0 + k * k), k, 2400);
    const Mat2 A = random_unimodular(rng);
    const Vec2 b(shift(rng), shift(rng));
    std::vector<Vec2> moved(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) moved[i] = A * pts[i] + b;
    const auto c0 = reparametrize_equiaffine(pts, true);
    const auto c1 = reparametrize_equiaffine(moved, true);
    EXPECT_NEAR(*c0.period, *c1.period, 1e-8);
    const auto k0 = frame_and_curvature(c0).kappa;
    const auto k1 = frame_and_curvature(c1).kappa;
    EXPECT_LT(max_abs_diff(k0, k1), 1e-8);
    const auto f0 = functionals(c0), f1 = functionals(c1);
    EXPECT_NEAR(f0.total_curvature, f1.total_curvature, 1e-8);
    EXPECT_NEAR(*f0.area, *f1.area, 1e-8);
    const double r0 = el_residual_area_constrained(c0).residual;
    EXPECT_NEAR(r0, el_residual_area_constrained(c1).residual, 1e-8 * std::max(1.0, r0));
  }
}
