#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "affine_elastica/classifier.hpp"
#include "affine_elastica/curvature.hpp"
#include "affine_elastica/error.hpp"
#include "affine_elastica/fullaffine.hpp"
#include "affine_elastica/synthesis.hpp"

using namespace affine_elastica;

namespace {

constexpr double pi = std::numbers::pi;
using C = std::complex<double>;

CurveJet jet_from_complex(const std::array<C, 5>& z) {
  CurveJet j;
  j.p = {z[0].real(), z[0].imag()};
  j.d1 = {z[1].real(), z[1].imag()};
  j.d2 = {z[2].real(), z[2].imag()};
  j.d3 = {z[3].real(), z[3].imag()};
  j.d4 = {z[4].real(), z[4].imag()};
  return j;
}

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

// r = exp(a theta): z = exp((a + i) theta).
ParametricCurve log_spiral(double a) {
  return [a](double t) {
    const C w(a, 1.0);
    std::array<C, 5> z;
    z[0] = std::exp(w * t);
    for (int k = 1; k < 5; ++k) z[k] = w * z[k - 1];
    return jet_from_complex(z);
  };
}

ParametricCurve hyperbola() {
  return [](double t) {
    CurveJet j;
    const double c = std::cosh(t), s = std::sinh(t);
    j.p = {c, s};
    j.d1 = {s, c};
    j.d2 = {c, s};
    j.d3 = {s, c};
    j.d4 = {c, s};
    return j;
  };
}

// z = r(theta) e^{i theta} with r = 1 + sum a_k cos(k theta + phi_k).
struct Radial {
  std::vector<int> k;
  std::vector<double> a, phi;
};

ParametricCurve radial_curve(const Radial& R) {
  return [R](double t) {
    std::array<double, 5> r{1.0, 0.0, 0.0, 0.0, 0.0};
    for (std::size_t m = 0; m < R.k.size(); ++m) {
      for (int j = 0; j < 5; ++j) {
        r[j] += R.a[m] * std::pow(R.k[m], j) * std::cos(R.k[m] * t + R.phi[m] + j * pi / 2);
      }
    }
    const C e = std::exp(C(0.0, t));
    const int binom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
    std::array<C, 5> z{};
    for (int n = 0; n < 5; ++n) {
      for (int j = 0; j <= n; ++j) z[n] += double(binom[n][j]) * r[j] * std::pow(C(0, 1), n - j) * e;
    }
    return jet_from_complex(z);
  };
}

// Random closed curves with positive equi-affine curvature.
CurveSamples random_oval(std::mt19937& rng) {
  std::uniform_real_distribution<double> amp(-0.012, 0.012), ph(0.0, 2 * pi);
  for (;;) {
    Radial R;
    for (int k : {2, 3, 4, 5}) {
      R.k.push_back(k);
      R.a.push_back(amp(rng));
      R.phi.push_back(ph(rng));
    }
    const auto c = reparametrize_equiaffine(radial_curve(R), 0.0, 2 * pi, 1200, true);
    const auto f = frame_and_curvature(c);
    if (*std::min_element(f.kappa.begin(), f.kappa.end()) > 0.05) return c;
  }
}

const auto tanh_curvature = [](double sF) { return 3.0 / std::sqrt(2.0) * std::tanh(std::sqrt(2.0) * sF); };

CurveSamples tanh_curve(std::size_t n = 4001) {
  return curve_from_full_affine_curvature(tanh_curvature, -1.5, 1.5, n);
}

Mat2 random_invertible(std::mt19937& rng, bool negative) {
  std::normal_distribution<double> g;
  for (;;) {
    Mat2 A;
    A << g(rng), g(rng), g(rng), g(rng);
    const double d = A.determinant();
    if (std::abs(d) > 0.2 && (d < 0) == negative) return A;
  }
}

double integral_sqrt_kappa(const CurveSamples& c) {
  const auto f = frame_and_curvature(c);
  std::vector<double> r(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) r[i] = std::sqrt(std::abs(f.kappa[i]));
  return integrate(r, c.spacing(), c.closed);
}

}  // namespace

TEST(FullAffine, UnitCircle) {
  const auto c = reparametrize_equiaffine(ellipse(1.0, 1.0), 0.0, 2 * pi, 800, true);
  const auto fd = full_affine_invariants(c);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(fd.kappa_F[i], 0.0, 1e-10);
    EXPECT_NEAR(fd.s_F[i], c.s[i] - c.s[0], 1e-10);
  }
  EXPECT_NEAR(fd.length, 2 * pi, 1e-10);
}

TEST(FullAffine, EllipseIsoperimetricEquality) {
  for (auto [a, b] : {std::pair{1.0, 1.0}, {3.0, 0.5}, {0.2, 1.7}}) {
    const auto c = reparametrize_equiaffine(ellipse(a, b), 0.0, 2 * pi, 1000, true);
    const auto fd = full_affine_invariants(c);
    EXPECT_NEAR(fd.length, 2 * pi, 1e-6);
    const auto fn = functionals(c);
    EXPECT_NEAR(fn.total_curvature * fn.length, 4 * pi * pi, 1e-6);
    EXPECT_LT(el_residual_sqrt(c), 1e-5);
    EXPECT_LT(el_residual_full_affine_form(fd), 1e-5);
    const auto cert = linear_fit_certificate(c);
    EXPECT_TRUE(cert.is_w_curve);
    const auto con = constrained_sqrt_residuals(c);
    EXPECT_LT(con.area_residual, 1e-5);
    EXPECT_LT(con.length_residual, 1e-5);
    EXPECT_LT(con.total_curvature_residual, 1e-5);
    EXPECT_NEAR(con.area_Q, 0.0, 1e-5);
    EXPECT_NEAR(con.length_Q, 0.0, 1e-5);
    EXPECT_NEAR(con.total_curvature_Q, 0.0, 1e-5);
  }
}

TEST(FullAffine, LogarithmicSpiralIsWCurve) {
  for (double a : {0.1, 0.25, -0.3}) {
    SCOPED_TRACE(a);
    const auto c = reparametrize_equiaffine(log_spiral(a), 0.0, 4.0, 3000, false);
    const auto fd = full_affine_invariants(c);
    const std::size_t mg = boundary_margin(c);
    const double k0 = fd.kappa_F[c.size() / 2];
    EXPECT_GT(std::abs(k0), 1e-3);
    for (std::size_t i = mg; i + mg < c.size(); ++i) EXPECT_NEAR(fd.kappa_F[i], k0, 1e-8);
    EXPECT_LT(el_residual_sqrt(c), 1e-5);
    EXPECT_TRUE(linear_fit_certificate(c).is_w_curve);
    // Constant full-affine curvature makes every term of the s_F form vanish.
    EXPECT_LT(el_residual_full_affine_form(fd), 1e-5);
  }
}

TEST(FullAffine, FirstCaseCurveIsNotCritical) {
  // q = 1 keeps kappa in [1, Q], so the whole curve is convex.
  const auto label = classify(invariants_from_qQ(1.0, 3.0), Branch::Closed);
  const auto c = synthesize(label, {0.0, 6.0, 3001, false});
  EXPECT_GT(el_residual_sqrt(c), 1e-2);
  EXPECT_GT(el_residual_full_affine_form(full_affine_invariants(c)), 1e-2);
  EXPECT_GT(constrained_sqrt_residuals(c).area_residual, 1e-2);
}

TEST(FullAffine, NonConvexRejected) {
  const auto c = reparametrize_equiaffine(hyperbola(), -1.0, 1.0, 500, false);
  try {
    full_affine_invariants(c);
    FAIL() << "expected NonConvex";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonConvex);
  }
  EXPECT_THROW(el_residual_sqrt(c), Error);
  EXPECT_THROW(constrained_sqrt_residuals(c), Error);
}

TEST(FullAffineForm, TanhCurvature) {
  EXPECT_LT(el_residual_full_affine_form(sample_full_affine(tanh_curvature, -3.0, 3.0, 3001)), 1e-6);
}

TEST(FullAffineForm, ConstantCurvature) {
  const auto fd = sample_full_affine([](double) { return 0.7; }, -2.0, 2.0, 501);
  EXPECT_LT(el_residual_full_affine_form(fd), 1e-10);
}

TEST(FullAffineForm, LinearCurvatureFails) {
  // k = s_F: k''' = k'' = 0, k' = 1, so the form equals 2 s_F^2 + 2.
  const auto res = full_affine_form_residuals(sample_full_affine([](double s) { return s; }, -2.0, 2.0, 801));
  EXPECT_GT(res.rms, 1.0);
  for (std::size_t i = 100; i < 700; i += 50) {
    EXPECT_NEAR(res.value[i], 2.0 * res.s_F[i] * res.s_F[i] + 2.0, 1e-8);
  }
}

TEST(Reconstruction, ZeroCurvatureGivesEllipse) {
  const auto c = curve_from_full_affine_curvature([](double) { return 0.0; }, -3.0, 3.0, 1201);
  const auto f = frame_and_curvature(c);
  for (double k : f.kappa) EXPECT_NEAR(k, 1.0, 1e-10);
  // Unit equi-affine curvature in this gauge: the unit circle through 0.
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_NEAR(std::hypot(c.x[i], c.y[i] - 1.0), 1.0, 1e-9);
  }
}

TEST(Reconstruction, TanhCurvatureRoundTrip) {
  const auto c = tanh_curve();
  const auto fd = full_affine_invariants(c);
  // The gauge puts s_F = 0 at s = 0.
  std::size_t i0 = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c.s[i]) < std::abs(c.s[i0])) i0 = i;
  }
  const std::size_t mg = boundary_margin(c);
  double worst = 0.0;
  for (std::size_t i = mg; i + mg < c.size(); ++i) {
    const double sF = fd.s_F[i] - fd.s_F[i0];
    worst = std::max(worst, std::abs(fd.kappa_F[i] - tanh_curvature(sF)));
  }
  EXPECT_LT(worst, 1e-4);
  EXPECT_NEAR(fd.s_F.back() - fd.s_F.front(), 3.0, 1e-6);
  // kappa = cosh^3(sqrt 2 s_F) in this gauge.
  const auto f = frame_and_curvature(c);
  EXPECT_NEAR(f.kappa[i0], 1.0, 1e-6);
}

TEST(Reconstruction, ConstantCurvatureGivesWCurve) {
  const auto c = curve_from_full_affine_curvature([](double) { return 0.4; }, -1.0, 1.0, 2001);
  const auto fd = full_affine_invariants(c);
  const std::size_t mg = boundary_margin(c);
  for (std::size_t i = mg; i + mg < c.size(); ++i) EXPECT_NEAR(fd.kappa_F[i], 0.4, 1e-5);
  EXPECT_TRUE(linear_fit_certificate(c).is_w_curve);
}

TEST(Reconstruction, BlowUp) {
  try {
    curve_from_full_affine_curvature([](double s) { return std::tan(s); }, 0.0, 1.5707963, 101);
    FAIL() << "expected BlowUp";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BlowUp);
  }
}

TEST(LinearFit, TanhCurveIsLinearInPosition) {
  const auto c = tanh_curve();
  EXPECT_LT(el_residual_sqrt(c), 1e-5);
  EXPECT_LT(el_residual_full_affine_form(full_affine_invariants(c)), 1e-5);
  const auto cert = linear_fit_certificate(c);
  EXPECT_FALSE(cert.is_w_curve);
  EXPECT_GT(std::hypot(cert.A, cert.B), 1e-2);
  EXPECT_LT(cert.fit_residual, 1e-4);
  ASSERT_TRUE(cert.origin.has_value());
  EXPECT_NEAR(cert.A * cert.origin->x() + cert.B * cert.origin->y() + cert.C, 0.0, 1e-9);
  const auto con = constrained_sqrt_residuals(c);
  EXPECT_LT(con.area_residual, 1e-4);
  EXPECT_NEAR(con.area_Q, 0.0, 1e-4);
}

TEST(ClosedCurves, TotalFullAffineCurvatureVanishes) {
  std::mt19937 rng(5);
  for (int t = 0; t < 8; ++t) {
    const auto c = random_oval(rng);
    const auto fd = full_affine_invariants(c);
    std::vector<double> integrand(c.size());
    const auto f = frame_and_curvature(c);
    for (std::size_t i = 0; i < c.size(); ++i) integrand[i] = fd.kappa_F[i] * std::sqrt(f.kappa[i]);
    EXPECT_NEAR(integrate(integrand, c.spacing(), true), 0.0, 1e-6);
    // Isoperimetric inequality, strict off ellipses.
    EXPECT_LE(fd.length, 2 * pi + 1e-6);
    EXPECT_LT(fd.length, 2 * pi - 1e-6);
  }
}

TEST(ClosedCurves, ThreeFourCurveBelowEllipseBound) {
  const auto sol = solve_closure(3, 4);
  const auto c = synthesize(closure_label(sol), {0.0, closure_period(sol), 3000, true});
  const auto fn = functionals(c);
  EXPECT_LT(fn.total_curvature * fn.length, 4 * pi * pi);
}

TEST(Invariance, InvertibleLinearMaps) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  std::vector<CurveSamples> curves = {
      reparametrize_equiaffine(ellipse(2.0, 0.7), 0.0, 2 * pi, 900, true),
      reparametrize_equiaffine(log_spiral(0.2), 0.0, 4.0, 1500, false),
      tanh_curve(2001),
      random_oval(rng),
  };
  for (const auto& c : curves) {
    const auto fd0 = full_affine_invariants(c);
    const std::size_t n = c.size();
    for (bool negative : {false, true}) {
      for (int t = 0; t < 3; ++t) {
        const Mat2 A = random_invertible(rng, negative);
        const auto ct = affine_image(c, A, Vec2(shift(rng), shift(rng)));
        ASSERT_TRUE(ct.derivatives.has_value());
        for (std::size_t i = 0; i < n; i += 37) {
          EXPECT_NEAR(det2(ct.derivatives->d1[i], ct.derivatives->d2[i]), 1.0, 1e-12);
        }
        const auto fd1 = full_affine_invariants(ct);
        EXPECT_NEAR(fd1.length, fd0.length, 1e-8 * std::max(1.0, fd0.length));
        // A reflection reverses the traversal and with it the sign of kappa_F.
        for (std::size_t k = 0; k < n; k += 7) {
          const std::size_t i = !negative ? k : (c.closed ? (n - k) % n : n - 1 - k);
          const double want = negative ? -fd0.kappa_F[i] : fd0.kappa_F[i];
          EXPECT_NEAR(fd1.kappa_F[k], want, 1e-8 * std::max(1.0, std::abs(want)));
        }
      }
    }
  }
}

TEST(SL2, Geodesics) {
  const SL2Point id = sl2_geodesic(SL2Direction::E3, 2 * pi);
  EXPECT_LT((id.matrix() - Mat2::Identity()).norm(), 1e-10);
  for (double t : {-1.0, 0.3, 2.0}) {
    const Mat2 m = sl2_geodesic(SL2Direction::E1, t).matrix();
    EXPECT_NEAR(m(0, 0), std::exp(t), 1e-12 * std::exp(std::abs(t)));
    EXPECT_NEAR(m(1, 1), std::exp(-t), 1e-12 * std::exp(std::abs(t)));
    EXPECT_NEAR(m(0, 1), 0.0, 1e-15);
  }
  Mat2 nil;
  nil << 0.0, 1.0, 0.0, 0.0;
  EXPECT_LT((sl2_geodesic(nil, 2.5).matrix() - (Mat2::Identity() + 2.5 * nil)).norm(), 1e-15);
  EXPECT_THROW(sl2_geodesic(Mat2::Identity(), 1.0), Error);
}

TEST(SL2, RandomTracelessExponentials) {
  std::mt19937 rng(21);
  std::normal_distribution<double> g;
  for (int k = 0; k < 100; ++k) {
    Mat2 v;
    const double a = g(rng);
    v << a, g(rng), g(rng), -a;
    const double t = g(rng);
    const SL2Point p = sl2_geodesic(v, t);
    EXPECT_NEAR(p.det(), 1.0, 1e-9 * std::max(1.0, p.matrix().squaredNorm()));
    // Velocity P^-1 P' is the constant v, so the g-speed is -det v.
    const double h = 1e-5;
    const Mat2 dp = (sl2_geodesic(v, t + h).matrix() - sl2_geodesic(v, t - h).matrix()) / (2 * h);
    const Mat2 body = p.matrix().inverse() * dp;
    EXPECT_LT((body - v).norm(), 1e-6 * std::max(1.0, v.norm() * p.matrix().squaredNorm()));
    EXPECT_NEAR(sl2_metric(v, v), -v.determinant(), 1e-12 * std::max(1.0, v.squaredNorm()));
  }
  EXPECT_GT(sl2_metric(sl2_basis(SL2Direction::E1), sl2_basis(SL2Direction::E1)), 0.0);
  EXPECT_GT(sl2_metric(sl2_basis(SL2Direction::E2), sl2_basis(SL2Direction::E2)), 0.0);
  EXPECT_LT(sl2_metric(sl2_basis(SL2Direction::E3), sl2_basis(SL2Direction::E3)), 0.0);
  EXPECT_NEAR(sl2_metric(sl2_basis(SL2Direction::E1), sl2_basis(SL2Direction::E3)), 0.0, 1e-15);
}

TEST(SL2, MetricIsBiInvariant) {
  std::mt19937 rng(22);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    Mat2 w, v;
    const double a = g(rng), b = g(rng);
    w << a, g(rng), g(rng), -a;
    v << b, g(rng), g(rng), g(rng);
    const Mat2 u = sl2_geodesic(w, g(rng)).matrix();
    const double ref = sl2_metric(v, v);
    EXPECT_NEAR(sl2_metric(u * v, u * v), ref, 1e-8 * std::max(1.0, u.squaredNorm() * v.squaredNorm()));
    EXPECT_NEAR(sl2_metric(v * u, v * u), ref, 1e-8 * std::max(1.0, u.squaredNorm() * v.squaredNorm()));
  }
}

TEST(Parabola, ParabolaIsItsOwnOsculatingParabola) {
  ParametricCurve par = [](double t) {
    CurveJet j;
    j.p = {t, 0.5 * t * t};
    j.d1 = {1.0, t};
    j.d2 = {0.0, 1.0};
    return j;
  };
  const auto c = sample_curve(par, -2.0, 4.0, 401, false);
  const auto path = congruence_path(c);
  for (std::size_t i = 0; i < c.size(); i += 20) {
    const PointedParabola pp = osculating_parabola(c, i);
    EXPECT_NEAR(pp.linear.det(), 1.0, 1e-12);
    EXPECT_LT((pp.translation - c.point(i)).norm(), 1e-14);
    // The image of the standard parabola is the parabola itself.
    for (double t : {-0.7, 0.4, 1.3}) {
      const Vec2 q = pp.linear.matrix() * Vec2(t, 0.5 * t * t) + pp.translation;
      EXPECT_NEAR(q.y(), 0.5 * q.x() * q.x(), 1e-12);
    }
    // Lower unipotent linear part: [[1, 0], [s, 1]].
    EXPECT_NEAR(path.linear[i].a, 1.0, 1e-12);
    EXPECT_NEAR(path.linear[i].b, 0.0, 1e-12);
    EXPECT_NEAR(path.linear[i].d, 1.0, 1e-12);
  }
  EXPECT_NEAR(congruence_arclength(c).length, 0.0, 1e-10);
}

TEST(Parabola, FourPointContactWithCircle) {
  const double R = 1.7;
  const auto c = reparametrize_equiaffine(ellipse(R, R), 0.0, 2 * pi, 400, true);
  for (std::size_t i = 0; i < c.size(); i += 50) {
    const PointedParabola pp = osculating_parabola(c, i);
    const Vec2 g = pp.translation;
    const Mat2 L = pp.linear.matrix();
    const Vec2 T = L.col(0), N = L.col(1);
    // |g + t T + t^2/2 N|^2 - R^2 as a polynomial in t.
    const double c0 = g.squaredNorm() - R * R;
    const double c1 = 2.0 * g.dot(T);
    const double c2 = T.squaredNorm() + g.dot(N);
    const double c3 = T.dot(N);
    const double c4 = 0.25 * N.squaredNorm();
    EXPECT_NEAR(c0, 0.0, 1e-10);
    EXPECT_NEAR(c1, 0.0, 1e-10);
    EXPECT_NEAR(c2, 0.0, 1e-10);
    EXPECT_NEAR(c3, 0.0, 1e-10);
    EXPECT_GT(c4, 1e-3);
  }
  const auto path = congruence_path(c);
  for (const auto& p : path.linear) EXPECT_NEAR(p.det(), 1.0, 1e-12);
}

TEST(Congruence, ArcLengthEqualsFullAffineLength) {
  struct Arc {
    const char* name;
    ParametricCurve curve;
    double t0, t1;
    int signature;
  };
  const std::vector<Arc> arcs = {
      {"ellipse", ellipse(2.0, 0.6), 0.0, pi / 2, -1},
      {"hyperbola", hyperbola(), -1.2, 0.8, 1},
      {"spiral", log_spiral(0.15), 0.0, 3.0, -1},
  };
  for (const auto& a : arcs) {
    SCOPED_TRACE(a.name);
    const auto c = reparametrize_equiaffine(a.curve, a.t0, a.t1, 2001, false);
    const auto L = congruence_arclength(c);
    const double ref = integral_sqrt_kappa(c);
    EXPECT_LT(std::abs(L.length - ref) / ref, 1e-4);
    EXPECT_EQ(L.signature, a.signature);
    EXPECT_FALSE(L.sign_change);
    // Positions alone give the same.
    CurveSamples bare = c;
    bare.derivatives.reset();
    EXPECT_LT(std::abs(congruence_arclength(bare).length - ref) / ref, 1e-4);
  }
}
