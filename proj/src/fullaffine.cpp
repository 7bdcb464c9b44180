#include "affine_elastica/fullaffine.hpp"

#include <algorithm>
#include <array>
#include <boost/math/interpolators/barycentric_rational.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "affine_elastica/error.hpp"

namespace affine_elastica {

namespace {

constexpr int kWide = 11;
constexpr double kSpacing = 0.03;

int stride_for(std::size_t n, double h, double scale) {
  const double spacing = kSpacing / std::max(1.0, scale);
  long stride = std::lround(spacing / h);
  const long cap = static_cast<long>(n) / (2 * kWide);
  return static_cast<int>(std::clamp(stride, 1L, std::max(1L, cap)));
}

double rms(std::span<const double> v, std::size_t margin) {
  if (v.size() <= 2 * margin) return 0.0;
  double acc = 0.0;
  for (std::size_t i = margin; i + margin < v.size(); ++i) acc += v[i] * v[i];
  return std::sqrt(acc / static_cast<double>(v.size() - 2 * margin));
}

// kappa_F together with what the s-derivatives of it need.
struct SqrtData {
  std::vector<double> kappa, kappa2, kF, kF1, kF3;
  std::size_t margin = 0;
};

SqrtData sqrt_data(const CurveSamples& c, const FdOptions& opts) {
  SqrtData d;
  d.kappa = frame_and_curvature(c, opts).kappa;
  double kmax = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k = d.kappa[i];
    if (!(k > 0.0)) {
      std::ostringstream os;
      os << "kappa = " << k << " at s = " << c.s[i] << " is not positive";
      throw Error(ErrorCode::NonConvex, os.str());
    }
    kmax = std::max(kmax, k);
  }
  const double h = c.spacing();
  const int stride = stride_for(c.size(), h, std::sqrt(kmax));
  const auto k1 = fd::derivative(d.kappa, h, 1, c.closed, stride, kWide);
  d.kappa2 = fd::derivative(d.kappa, h, 2, c.closed, stride, kWide);
  d.kF.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) d.kF[i] = k1[i] / (2.0 * d.kappa[i] * std::sqrt(d.kappa[i]));
  d.kF1 = fd::derivative(d.kF, h, 1, c.closed, stride, kWide);
  d.kF3 = fd::derivative(d.kF, h, 3, c.closed, stride, kWide);
  d.margin = c.closed ? 0 : boundary_margin(c, opts) + static_cast<std::size_t>(4 * (kWide / 2) * stride);
  return d;
}

}  // namespace

FullAffineData full_affine_invariants(const CurveSamples& c, const FdOptions& opts) {
  c.validate();
  const CurvatureJet j = curvature_jet(c, opts);
  FullAffineData out;
  out.closed = c.closed;
  out.kappa_F.resize(c.size());
  std::vector<double> root(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k = j.kappa[i];
    if (!(k > 0.0)) {
      std::ostringstream os;
      os << "kappa = " << k << " at s = " << c.s[i] << " is not positive";
      throw Error(ErrorCode::NonConvex, os.str());
    }
    root[i] = std::sqrt(k);
    out.kappa_F[i] = j.d1[i] / (2.0 * k * root[i]);
  }
  const double h = c.spacing();
  out.s_F = cumulative_integral(root, h);
  out.length = c.closed ? integrate(root, h, true) : out.s_F.back();
  return out;
}

FullAffineData sample_full_affine(const std::function<double(double)>& kappa_F, double a, double b,
                                  std::size_t n) {
  if (n < 7 || !(b > a)) throw Error(ErrorCode::InvalidParameter, "need b > a and n >= 7");
  FullAffineData out;
  out.s_F.resize(n);
  out.kappa_F.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.s_F[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.kappa_F[i] = kappa_F(out.s_F[i]);
  }
  out.length = b - a;
  return out;
}

std::vector<double> sqrt_el_expression(const CurveSamples& c, const FdOptions& opts) {
  c.validate();
  const SqrtData d = sqrt_data(c, opts);
  std::vector<double> e(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) e[i] = d.kF3[i] + d.kappa[i] * d.kF1[i];
  return e;
}

double el_residual_sqrt(const CurveSamples& c, const FdOptions& opts) {
  c.validate();
  const SqrtData d = sqrt_data(c, opts);
  std::vector<double> e(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) e[i] = d.kF3[i] + d.kappa[i] * d.kF1[i];
  return rms(e, d.margin);
}

FullAffineFormResidual full_affine_form_residuals(const FullAffineData& fd) {
  const std::size_t n = fd.s_F.size();
  if (n < 7 || fd.kappa_F.size() != n) {
    throw Error(ErrorCode::InvalidParameter, "full-affine data need at least 7 matching samples");
  }
  FullAffineFormResidual out;
  out.s_F.resize(n);
  std::vector<double> k(n);
  const double s0 = fd.s_F.front();
  const double H = fd.closed ? fd.length / static_cast<double>(n)
                             : (fd.s_F.back() - s0) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out.s_F[i] = s0 + H * static_cast<double>(i);

  bool uniform = true;
  for (std::size_t i = 0; i < n && uniform; ++i) {
    uniform = std::abs(fd.s_F[i] - out.s_F[i]) <= 1e-12 * std::max(1.0, std::abs(out.s_F[i]));
  }
  if (uniform) {
    k = fd.kappa_F;
  } else {
    std::vector<double> xs, ys;
    const std::size_t pad = fd.closed ? std::min<std::size_t>(20, n / 2) : 0;
    for (std::size_t i = n - pad; i < n; ++i) {
      xs.push_back(fd.s_F[i] - fd.length);
      ys.push_back(fd.kappa_F[i]);
    }
    xs.insert(xs.end(), fd.s_F.begin(), fd.s_F.end());
    ys.insert(ys.end(), fd.kappa_F.begin(), fd.kappa_F.end());
    for (std::size_t i = 0; i < pad; ++i) {
      xs.push_back(fd.s_F[i] + fd.length);
      ys.push_back(fd.kappa_F[i]);
    }
    const boost::math::barycentric_rational<double> interp(std::move(xs), std::move(ys), 6);
    for (std::size_t i = 0; i < n; ++i) k[i] = interp(out.s_F[i]);
  }

  double kmax = 0.0;
  for (double v : k) kmax = std::max(kmax, std::abs(v));
  const int stride = stride_for(n, H, kmax);
  const auto k1 = fd::derivative(k, H, 1, fd.closed, stride, kWide);
  const auto k2 = fd::derivative(k, H, 2, fd.closed, stride, kWide);
  const auto k3 = fd::derivative(k, H, 3, fd.closed, stride, kWide);
  out.value.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.value[i] = k3[i] + 3.0 * k[i] * k2[i] + k1[i] * k1[i] + (2.0 * k[i] * k[i] + 1.0) * k1[i];
  }
  const std::size_t margin = fd.closed ? 0 : static_cast<std::size_t>(2 * (kWide / 2) * stride);
  out.rms = rms(out.value, margin);
  return out;
}

double el_residual_full_affine_form(const FullAffineData& fd) {
  return full_affine_form_residuals(fd).rms;
}

LinearFitCertificate linear_fit_certificate(const CurveSamples& c, const FdOptions& opts) {
  const FullAffineData fd = full_affine_invariants(c, opts);
  const std::size_t margin = boundary_margin(c, opts);
  const std::size_t rows = c.size() - 2 * margin;
  Vec2 mean = Vec2::Zero();
  for (std::size_t i = margin; i + margin < c.size(); ++i) mean += c.point(i);
  mean /= static_cast<double>(rows);
  Eigen::MatrixXd M(rows, 3);
  Eigen::VectorXd rhs(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = r + margin;
    const Vec2 p = c.point(i) - mean;
    M.row(static_cast<Eigen::Index>(r)) << p.x(), p.y(), 1.0;
    rhs(static_cast<Eigen::Index>(r)) = fd.kappa_F[i];
  }
  const Eigen::Vector3d sol = M.colPivHouseholderQr().solve(rhs);
  LinearFitCertificate out;
  out.A = sol(0);
  out.B = sol(1);
  out.C = sol(2) - sol(0) * mean.x() - sol(1) * mean.y();
  out.fit_residual = std::sqrt((M * sol - rhs).squaredNorm() / static_cast<double>(rows));
  const double slope = std::hypot(out.A, out.B);
  out.is_w_curve = slope * c.diameter() <= 1e-5 * std::max(1.0, std::abs(sol(2)));
  if (!out.is_w_curve) out.origin = -out.C / (slope * slope) * Vec2(out.A, out.B);
  return out;
}

ConstrainedSqrtResiduals constrained_sqrt_residuals(const CurveSamples& c, const FdOptions& opts) {
  c.validate();
  const SqrtData d = sqrt_data(c, opts);
  const std::size_t n = c.size();
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = d.kF3[i] + d.kappa[i] * d.kF1[i];

  // Least-squares e = Q w over the interior.
  auto fit = [&](auto w_of) {
    double ww = 0.0, we = 0.0;
    for (std::size_t i = d.margin; i + d.margin < n; ++i) {
      const double w = w_of(i);
      ww += w * w;
      we += w * e[i];
    }
    const double Q = ww > 0.0 ? we / ww : 0.0;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = e[i] - Q * w_of(i);
    return std::pair{Q, rms(r, d.margin)};
  };
  ConstrainedSqrtResiduals out;
  out.unconstrained = rms(e, d.margin);
  std::tie(out.area_Q, out.area_residual) = fit([](std::size_t) { return 1.0; });
  std::tie(out.length_Q, out.length_residual) = fit([&](std::size_t i) { return d.kappa[i]; });
  std::tie(out.total_curvature_Q, out.total_curvature_residual) =
      fit([&](std::size_t i) { return d.kappa2[i] + d.kappa[i] * d.kappa[i]; });
  return out;
}

CurveSamples curve_from_full_affine_curvature(const std::function<double(double)>& kappa_F,
                                              double a, double b, std::size_t n) {
  namespace odeint = boost::numeric::odeint;
  if (n < 7 || !(b > a)) throw Error(ErrorCode::InvalidParameter, "need b > a and n >= 7");
  constexpr double kBlowUp = 1e12;

  // kappa and s as functions of s_F.
  using S2 = std::array<double, 2>;
  auto rhs_F = [&](const S2& y, S2& dy, double sF) {
    dy = {2.0 * y[0] * kappa_F(sF), 1.0 / std::sqrt(y[0])};
  };
  auto s_at = [&](double target) {
    S2 y{1.0, 0.0};
    if (target == 0.0) return 0.0;
    auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<S2>());
    const double dt = target > 0 ? 1e-3 : -1e-3;
    odeint::integrate_adaptive(stepper, rhs_F, y, 0.0, target, dt, [&](const S2& st, double sF) {
      if (!std::isfinite(st[0]) || st[0] > kBlowUp || !(st[0] > 0.0)) {
        std::ostringstream os;
        os << "kappa leaves (0, " << kBlowUp << ") at s_F = " << sF << ", s = " << st[1];
        throw Error(ErrorCode::BlowUp, os.str());
      }
    });
    return y[1];
  };
  const double sa = s_at(a), sb = s_at(b);

  // kappa, s_F, gamma, gamma', gamma'' as functions of s.
  using S8 = std::array<double, 8>;
  auto rhs = [&](const S8& y, S8& dy, double) {
    const double k = y[0];
    dy[0] = 2.0 * k * std::sqrt(k) * kappa_F(y[1]);
    dy[1] = std::sqrt(k);
    dy[2] = y[4];
    dy[3] = y[5];
    dy[4] = y[6];
    dy[5] = y[7];
    dy[6] = -k * y[4];
    dy[7] = -k * y[5];
  };
  CurveSamples out;
  out.s.resize(n);
  out.x.resize(n);
  out.y.resize(n);
  CurveSamples::Derivatives der;
  der.d1.resize(n);
  der.d2.resize(n);
  der.d3.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.s[i] = sa + (sb - sa) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  auto store = [&](std::size_t i, const S8& y) {
    if (!std::isfinite(y[0]) || y[0] > kBlowUp || !(y[0] > 0.0)) {
      std::ostringstream os;
      os << "kappa leaves (0, " << kBlowUp << ") near s = " << out.s[i];
      throw Error(ErrorCode::BlowUp, os.str());
    }
    out.x[i] = y[2];
    out.y[i] = y[3];
    der.d1[i] = {y[4], y[5]};
    der.d2[i] = {y[6], y[7]};
    der.d3[i] = -y[0] * der.d1[i];
  };
  auto sweep = [&](const std::vector<std::size_t>& order) {
    S8 y{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0};
    double t = 0.0;
    for (std::size_t i : order) {
      const double target = out.s[i];
      if (target != t) {
        auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<S8>());
        odeint::integrate_adaptive(stepper, rhs, y, t, target, target > t ? 1e-3 : -1e-3);
        t = target;
      }
      store(i, y);
    }
  };
  std::vector<std::size_t> up, down;
  for (std::size_t i = 0; i < n; ++i) (out.s[i] >= 0.0 ? up : down).push_back(i);
  std::reverse(down.begin(), down.end());
  sweep(up);
  sweep(down);
  out.derivatives = std::move(der);
  out.metadata["case"] = "full-affine";
  out.metadata["sF_min"] = std::to_string(a);
  out.metadata["sF_max"] = std::to_string(b);
  return out;
}

Mat2 SL2Point::matrix() const {
  Mat2 m;
  m << a, b, c, d;
  return m;
}

SL2Point SL2Point::from_matrix(const Mat2& m) { return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)}; }

Mat2 sl2_basis(SL2Direction e) {
  Mat2 m;
  switch (e) {
    case SL2Direction::E1:
      m << 1.0, 0.0, 0.0, -1.0;
      break;
    case SL2Direction::E2:
      m << 0.0, 1.0, 1.0, 0.0;
      break;
    case SL2Direction::E3:
      m << 0.0, -1.0, 1.0, 0.0;
      break;
  }
  return m;
}

double sl2_metric(const Mat2& u, const Mat2& v) {
  return -0.5 * ((u + v).determinant() - u.determinant() - v.determinant());
}

SL2Point sl2_geodesic(const Mat2& v, double t) {
  if (std::abs(v.trace()) > 1e-12 * std::max(1.0, v.norm())) {
    throw Error(ErrorCode::InvalidParameter, "sl(2) directions must be traceless");
  }
  // v^2 = -det(v) I.
  const double D = v.determinant();
  const Mat2 I = Mat2::Identity();
  Mat2 m;
  if (D > 0.0) {
    const double w = std::sqrt(D);
    m = std::cos(w * t) * I + (std::sin(w * t) / w) * v;
  } else if (D < 0.0) {
    const double w = std::sqrt(-D);
    m = std::cosh(w * t) * I + (std::sinh(w * t) / w) * v;
  } else {
    m = I + t * v;
  }
  return SL2Point::from_matrix(m);
}

SL2Point sl2_geodesic(SL2Direction e, double t) { return sl2_geodesic(sl2_basis(e), t); }

namespace {

PointedParabola parabola_from_frame(const Vec2& p, const Vec2& T, const Vec2& N) {
  Mat2 L;
  L << T.x(), N.x(), T.y(), N.y();
  const double det = L.determinant();
  if (det > 0.0) L /= std::sqrt(det);
  return {SL2Point::from_matrix(L), p};
}

}  // namespace

PointedParabola osculating_parabola(const CurveSamples& c, std::size_t i, const FdOptions& opts) {
  if (i >= c.size()) throw Error(ErrorCode::InvalidParameter, "sample index out of range");
  if (c.derivatives) {
    return parabola_from_frame(c.point(i), c.derivatives->d1[i], c.derivatives->d2[i]);
  }
  const FrameField f = frame_and_curvature(c, opts);
  return parabola_from_frame(c.point(i), f.T[i], f.N[i]);
}

PointedParabolaPath congruence_path(const CurveSamples& c, const FdOptions& opts) {
  const FrameField f = frame_and_curvature(c, opts);
  PointedParabolaPath out;
  out.t = c.s;
  out.linear.reserve(c.size());
  out.translation.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const PointedParabola pp = parabola_from_frame(c.point(i), f.T[i], f.N[i]);
    out.linear.push_back(pp.linear);
    out.translation.push_back(pp.translation);
  }
  return out;
}

CongruenceLength congruence_arclength(const CurveSamples& c, const FdOptions& opts) {
  const PointedParabolaPath path = congruence_path(c, opts);
  const std::size_t n = c.size();
  const double h = c.spacing();
  const int stride = effective_stride(c, opts);
  const int width = c.derivatives ? 7 : kWide;
  std::array<std::vector<double>, 4> entries;
  for (auto& e : entries) e.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    entries[0][i] = path.linear[i].a;
    entries[1][i] = path.linear[i].b;
    entries[2][i] = path.linear[i].c;
    entries[3][i] = path.linear[i].d;
  }
  std::array<std::vector<double>, 4> rate;
  for (int k = 0; k < 4; ++k) rate[k] = fd::derivative(entries[k], h, 1, c.closed, stride, width);
  std::vector<double> speed(n);
  bool neg = false, pos = false;
  for (std::size_t i = 0; i < n; ++i) {
    Mat2 v;
    v << rate[0][i], rate[1][i], rate[2][i], rate[3][i];
    const double g = -v.determinant();
    neg = neg || g < 0.0;
    pos = pos || g > 0.0;
    speed[i] = std::sqrt(std::abs(g));
  }
  CongruenceLength out;
  out.length = integrate(speed, h, c.closed);
  out.sign_change = neg && pos;
  out.signature = out.sign_change ? 0 : (neg ? -1 : 1);
  return out;
}

}  // namespace affine_elastica
