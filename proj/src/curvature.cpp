#include "affine_elastica/curvature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numeric>

#include "affine_elastica/error.hpp"

namespace affine_elastica {

namespace {


constexpr double kStrideSpacing = 0.03;
// Stencil width for derivatives taken from positions alone.
constexpr int kWideStencil = 11;

// Lagrange interpolation through f(a), ..., f(a + w - 1) at fractional index t.
template <class F>
double lagrange(F&& f, long a, int w, double t) {
  double acc = 0.0;
  for (int k = 0; k < w; ++k) {
    double basis = 1.0;
    const double xk = static_cast<double>(a + k);
    for (int j = 0; j < w; ++j) {
      if (j != k) basis *= (t - static_cast<double>(a + j)) / (xk - static_cast<double>(a + j));
    }
    acc += basis * f(a + k);
  }
  return acc;
}

CurveJet reversed(const CurveJet& j) {
  CurveJet r = j;
  r.d1 = -j.d1;
  r.d3 = -j.d3;
  return r;
}

// Jet with respect to equi-affine arc length from a jet in any parameter.
CurveJet to_arclength(const CurveJet& j) {
  const double D = det2(j.d1, j.d2);
  const double D1 = det2(j.d1, j.d3);
  const double D2 = det2(j.d2, j.d3) + det2(j.d1, j.d4);
  const double sig = std::cbrt(D);
  const double sig1 = D1 / (3.0 * sig * sig);
  const double sig2 = D2 / (3.0 * sig * sig) - 2.0 * D1 * D1 / (9.0 * std::pow(sig, 5));
  const double u = 1.0 / sig;
  const double u1 = -sig1 / (sig * sig);
  const double u2 = -sig2 / (sig * sig) + 2.0 * sig1 * sig1 / (sig * sig * sig);
  CurveJet out;
  out.p = j.p;
  out.d1 = u * j.d1;
  out.d2 = u * (u1 * j.d1 + u * j.d2);
  out.d3 = u * (u1 * u1 + u * u2) * j.d1 + 3.0 * u * u * u1 * j.d2 + u * u * u * j.d3;
  return out;
}

struct PositionDerivatives {
  std::vector<double> x1, y1, x2, y2, x3, y3;
};

std::vector<double> centred(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mean;
  return out;
}

PositionDerivatives position_derivatives(const CurveSamples& c, int stride) {
  const double h = c.spacing();
  const bool per = c.closed;
  const auto x = centred(c.x);
  const auto y = centred(c.y);
  PositionDerivatives d;
  d.x1 = fd::derivative(x, h, 1, per, stride, kWideStencil);
  d.y1 = fd::derivative(y, h, 1, per, stride, kWideStencil);
  d.x2 = fd::derivative(x, h, 2, per, stride, kWideStencil);
  d.y2 = fd::derivative(y, h, 2, per, stride, kWideStencil);
  d.x3 = fd::derivative(x, h, 3, per, stride, kWideStencil);
  d.y3 = fd::derivative(y, h, 3, per, stride, kWideStencil);
  return d;
}

}  // namespace

int effective_stride(const CurveSamples& c, const FdOptions& opts) {
  if (opts.stride > 0) return opts.stride;
  if (c.derivatives) return 1;
  const double h = c.spacing();
  // Rough curvature scale from the finest stencil sets the length scale.
  const auto d = position_derivatives(c, 1);
  double kmax = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    kmax = std::max(kmax, std::abs(d.x2[i] * d.y3[i] - d.x3[i] * d.y2[i]));
  }
  const double spacing = kStrideSpacing / std::max(1.0, std::sqrt(kmax));
  long stride = std::lround(spacing / h);
  const long cap = static_cast<long>(c.size()) / (2 * kWideStencil);
  stride = std::clamp(stride, 1L, std::max(1L, cap));
  return static_cast<int>(stride);
}

std::size_t boundary_margin(const CurveSamples& c, const FdOptions& opts) {
  if (c.closed) return 0;
  const int stride = effective_stride(c, opts);
  // Curvature from positions is itself one-sided near the ends.
  return static_cast<std::size_t>(c.derivatives ? 3 : 2 * (kWideStencil / 2) * stride);
}

CurveSamples reparametrize_equiaffine(const ParametricCurve& curve, double t0, double t1,
                                      std::size_t n, bool closed) {
  if (!(t1 > t0)) throw Error(ErrorCode::InvalidParameter, "empty parameter interval");
  if (n < 7) throw Error(ErrorCode::InvalidParameter, "at least 7 samples are required");
  constexpr int kScan = 4096;
  double dmin = INFINITY, dmax = -INFINITY, amax = 0.0;
  for (int i = 0; i <= kScan; ++i) {
    const double t = t0 + (t1 - t0) * i / kScan;
    const CurveJet j = curve(t);
    const double D = det2(j.d1, j.d2);
    dmin = std::min(dmin, D);
    dmax = std::max(dmax, D);
    amax = std::max(amax, std::abs(D));
  }
  if (!(amax > 0.0) || (dmin < 0.0 && dmax > 0.0) ||
      std::min(std::abs(dmin), std::abs(dmax)) < 1e-12 * amax) {
    throw Error(ErrorCode::InflectionPoint, "|gamma', gamma''| vanishes or changes sign");
  }
  ParametricCurve g = curve;
  if (dmax < 0.0) {
    g = [curve, t0, t1](double t) { return reversed(curve(t0 + t1 - t)); };
  }
  auto sigma = [&g](double t) {
    const CurveJet j = g(t);
    return std::cbrt(det2(j.d1, j.d2));
  };
  using boost::math::quadrature::gauss;
  std::vector<double> grid(kScan + 1), cum(kScan + 1, 0.0);
  for (int i = 0; i <= kScan; ++i) grid[i] = t0 + (t1 - t0) * i / kScan;
  for (int i = 1; i <= kScan; ++i) {
    cum[i] = cum[i - 1] + gauss<double, 20>::integrate(sigma, grid[i - 1], grid[i]);
  }
  const double L = cum.back();
  const double h = closed ? L / static_cast<double>(n) : L / static_cast<double>(n - 1);
  CurveSamples c;
  c.closed = closed;
  if (closed) c.period = L;
  c.s.resize(n);
  c.x.resize(n);
  c.y.resize(n);
  CurveSamples::Derivatives d;
  d.d1.resize(n);
  d.d2.resize(n);
  d.d3.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double target = h * static_cast<double>(i);
    std::size_t k = static_cast<std::size_t>(
        std::upper_bound(cum.begin(), cum.end(), target) - cum.begin());
    k = std::clamp<std::size_t>(k, 1, kScan) - 1;
    double lo = grid[k], hi = grid[k + 1];
    double t = lo + (hi - lo) * (target - cum[k]) / std::max(cum[k + 1] - cum[k], 1e-300);
    for (int it = 0; it < 50; ++it) {
      const double f = cum[k] + gauss<double, 20>::integrate(sigma, grid[k], t) - target;
      if (f > 0.0) hi = t; else lo = t;
      double next = t - f / sigma(t);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - t) < 1e-15 * (1.0 + std::abs(t));
      t = next;
      if (done) break;
    }
    const CurveJet j = to_arclength(g(t));
    c.s[i] = target;
    c.x[i] = j.p.x();
    c.y[i] = j.p.y();
    d.d1[i] = j.d1;
    d.d2[i] = j.d2;
    d.d3[i] = j.d3;
  }
  c.derivatives = std::move(d);
  return c;
}

CurveSamples reparametrize_equiaffine(std::span<const Vec2> points, bool closed,
                                      std::size_t n_out) {
  const long m = static_cast<long>(points.size());
  if (m < 8) throw Error(ErrorCode::InvalidParameter, "at least 8 points are required");
  if (n_out == 0) n_out = points.size();
  std::vector<double> x(m), y(m);
  for (long i = 0; i < m; ++i) {
    x[i] = points[i].x();
    y[i] = points[i].y();
  }
  // A coarse stride keeps the rounding of the index-unit differences, which
  // grows like h^-2, well below the interpolation error.
  const int tstride = static_cast<int>(std::max(1L, m / 256));
  auto det_series = [&]() {
    const auto xc = centred(x), yc = centred(y);
    const auto x1 = fd::derivative(xc, 1.0, 1, closed, tstride, kWideStencil);
    const auto y1 = fd::derivative(yc, 1.0, 1, closed, tstride, kWideStencil);
    const auto x2 = fd::derivative(xc, 1.0, 2, closed, tstride, kWideStencil);
    const auto y2 = fd::derivative(yc, 1.0, 2, closed, tstride, kWideStencil);
    std::vector<double> D(m);
    for (long i = 0; i < m; ++i) D[i] = x1[i] * y2[i] - x2[i] * y1[i];
    return D;
  };
  std::vector<double> D = det_series();
  const auto [mn, mx] = std::minmax_element(D.begin(), D.end());
  const double amax = std::max(std::abs(*mn), std::abs(*mx));
  if (!(amax > 0.0) || (*mn < 0.0 && *mx > 0.0) ||
      std::min(std::abs(*mn), std::abs(*mx)) < 1e-10 * amax) {
    throw Error(ErrorCode::InflectionPoint, "|gamma', gamma''| vanishes or changes sign");
  }
  if (*mx < 0.0) {
    std::reverse(x.begin(), x.end());
    std::reverse(y.begin(), y.end());
    if (closed) {
      std::rotate(x.rbegin(), x.rbegin() + 1, x.rend());
      std::rotate(y.rbegin(), y.rbegin() + 1, y.rend());
    }
    D = det_series();
  }
  std::vector<double> sig(m);
  for (long i = 0; i < m; ++i) sig[i] = std::cbrt(D[i]);
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(m);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(m);
  for (long i = 0; i < m; ++i) {
    x[i] -= xm;
    y[i] -= ym;
  }

  // Cumulative arc length S at integer parameter values 0..m (closed) or
  // 0..m-1 (open).
  std::vector<double> S;
  constexpr long kPad = 3;
  if (closed) {
    std::vector<double> ext(m + 1 + 2 * kPad);
    for (long i = 0; i < static_cast<long>(ext.size()); ++i) ext[i] = sig[((i - kPad) % m + m) % m];
    const auto cum = cumulative_integral(ext, 1.0);
    S.resize(m + 1);
    for (long i = 0; i <= m; ++i) S[i] = cum[i + kPad] - cum[kPad];
  } else {
    S = cumulative_integral(sig, 1.0);
  }
  const double L = S.back();
  const double h = closed ? L / static_cast<double>(n_out) : L / static_cast<double>(n_out - 1);

  constexpr int kW = 8;
  auto window = [&](long k) -> long {
    long a = k - kW / 2 + 1;
    if (!closed) a = std::clamp(a, 0L, m - kW);
    return a;
  };
  auto wrap = [&](long i) { return closed ? ((i % m) + m) % m : i; };
  auto S_at = [&](long i) -> double {
    if (!closed) return S[i];
    const long q = (i >= 0) ? i / m : -((-i + m - 1) / m);
    return S[i - q * m] + static_cast<double>(q) * L;
  };
  auto sig_at = [&](long i) { return sig[wrap(i)]; };

  CurveSamples c;
  c.closed = closed;
  if (closed) c.period = L;
  c.s.resize(n_out);
  c.x.resize(n_out);
  c.y.resize(n_out);
  for (std::size_t j = 0; j < n_out; ++j) {
    const double target = h * static_cast<double>(j);
    long k = static_cast<long>(std::upper_bound(S.begin(), S.end(), target) - S.begin()) - 1;
    k = std::clamp(k, 0L, static_cast<long>(S.size()) - 2);
    const long a = window(k);
    // Local coordinate u = t - a keeps the root free of cancellation.
    const double base = static_cast<double>(k - a);
    auto S_loc = [&](long i) { return S_at(a + i) - S[k]; };
    auto sig_loc = [&](long i) { return sig_at(a + i); };
    const double goal = target - S[k];
    double lo = 0.0, hi = 1.0;
    double tau = goal / std::max(S[k + 1] - S[k], 1e-300);
    for (int it = 0; it < 60; ++it) {
      const double f = lagrange(S_loc, 0, kW, base + tau) - goal;
      if (f > 0.0) hi = tau; else lo = tau;
      double next = tau - f / lagrange(sig_loc, 0, kW, base + tau);
      if (!(next >= lo && next <= hi)) next = 0.5 * (lo + hi);
      const bool done = std::abs(next - tau) < 1e-16;
      tau = next;
      if (done) break;
    }
    const double u = base + tau;
    c.s[j] = target;
    c.x[j] = xm + lagrange([&](long i) { return x[wrap(a + i)]; }, 0, kW, u);
    c.y[j] = ym + lagrange([&](long i) { return y[wrap(a + i)]; }, 0, kW, u);
  }
  return c;
}

FrameField frame_and_curvature(const CurveSamples& c, const FdOptions& opts) {
  c.validate();
  FrameField f;
  const std::size_t n = c.size();
  f.T.resize(n);
  f.N.resize(n);
  f.kappa.resize(n);
  if (c.derivatives) {
    for (std::size_t i = 0; i < n; ++i) {
      f.T[i] = c.derivatives->d1[i];
      f.N[i] = c.derivatives->d2[i];
      f.kappa[i] = det2(c.derivatives->d2[i], c.derivatives->d3[i]);
    }
    return f;
  }
  const auto d = position_derivatives(c, effective_stride(c, opts));
  for (std::size_t i = 0; i < n; ++i) {
    f.T[i] = {d.x1[i], d.y1[i]};
    f.N[i] = {d.x2[i], d.y2[i]};
    f.kappa[i] = d.x2[i] * d.y3[i] - d.x3[i] * d.y2[i];
  }
  return f;
}

CurvatureJet curvature_jet(const CurveSamples& c, const FdOptions& opts) {
  CurvatureJet j;
  j.kappa = frame_and_curvature(c, opts).kappa;
  const int stride = effective_stride(c, opts);
  const double h = c.spacing();
  const int width = c.derivatives ? 7 : kWideStencil;
  j.d1 = fd::derivative(j.kappa, h, 1, c.closed, stride, width);
  j.d2 = fd::derivative(j.kappa, h, 2, c.closed, stride, width);
  return j;
}

SupportData support_function(const CurveSamples& c, const Vec2& origin, const FdOptions& opts) {
  const FrameField f = frame_and_curvature(c, opts);
  SupportData out;
  out.rho.resize(c.size());
  out.phi.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 P = c.point(i) - origin;
    out.rho[i] = det2(P, f.T[i]);
    out.phi[i] = det2(P, f.N[i]);
  }
  return out;
}

double interior_rms(const CurveSamples& c, std::span<const double> v, const FdOptions& opts) {
  const std::size_t margin = boundary_margin(c, opts);
  if (v.size() <= 2 * margin) return 0.0;
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = margin; i + margin < v.size(); ++i) {
    acc += v[i] * v[i];
    ++count;
  }
  return std::sqrt(acc / static_cast<double>(count));
}

AreaResidual el_residual_area_constrained(const CurveSamples& c, const FdOptions& opts) {
  const CurvatureJet j = curvature_jet(c, opts);
  const std::size_t margin = boundary_margin(c, opts);
  std::vector<double> e(c.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = j.d2[i] + j.kappa[i] * j.kappa[i];
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = margin; i + margin < e.size(); ++i, ++count) mean += e[i];
  mean /= static_cast<double>(std::max<std::size_t>(count, 1));
  for (double& v : e) v -= mean;
  return {mean, interior_rms(c, e, opts)};
}

AreaLengthResidual el_residual_area_and_length(const CurveSamples& c, const FdOptions& opts) {
  const CurvatureJet j = curvature_jet(c, opts);
  const std::size_t margin = boundary_margin(c, opts);
  const std::size_t rows = c.size() - 2 * margin;
  Eigen::MatrixXd M(rows, 2);
  Eigen::VectorXd rhs(rows);
  double kmax = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = r + margin;
    M(r, 0) = 1.0;
    M(r, 1) = j.kappa[i];
    rhs(r) = j.d2[i] + j.kappa[i] * j.kappa[i];
    kmax = std::max(kmax, std::abs(j.kappa[i]));
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(1e-9);
  cod.compute(M);
  const Eigen::Vector2d sol = cod.solve(rhs);
  AreaLengthResidual out;
  out.C = sol(0);
  out.A = sol(1);
  out.underdetermined = cod.rank() < 2;
  const Eigen::VectorXd res = M * sol - rhs;
  out.residual = std::sqrt(res.squaredNorm() / static_cast<double>(rows));
  return out;
}

GeneralResidual el_residual_general(const CurveSamples& c, const CurvatureFunction& F,
                                    const FdOptions& opts) {
  const CurvatureJet j = curvature_jet(c, opts);
  const FrameField f = frame_and_curvature(c, opts);
  const std::size_t margin = boundary_margin(c, opts);
  const std::size_t rows = c.size() - 2 * margin;
  Eigen::MatrixXd M(rows, 2);
  Eigen::VectorXd rhs(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t i = r + margin;
    const double k = j.kappa[i];
    M(r, 0) = f.T[i].x();
    M(r, 1) = f.T[i].y();
    rhs(r) = F.d3(k) * j.d1[i] * j.d1[i] + F.d2(k) * j.d2[i] + 4.0 * F.d1(k) * k - 2.0 * F.f(k);
  }
  const Eigen::Vector2d sol = M.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd res = M * sol - rhs;
  return {sol(0), sol(1), std::sqrt(res.squaredNorm() / static_cast<double>(rows))};
}

Vec2 translate_to_canonical(const CurveSamples& c, double tol, const FdOptions& opts) {
  const AreaResidual fit = el_residual_area_constrained(c, opts);
  const CurvatureJet j = curvature_jet(c, opts);
  double kscale = 0.0;
  for (double k : j.kappa) kscale = std::max(kscale, k * k);
  if (fit.residual > tol * std::max(1.0, std::abs(fit.C))) {
    throw Error(ErrorCode::NotCritical, "kappa'' + kappa^2 is not constant");
  }
  if (std::abs(fit.C) <= 1e-8 * std::max(1.0, kscale)) {
    throw Error(ErrorCode::ZeroC, "kappa'' + kappa^2 vanishes");
  }
  const FrameField f = frame_and_curvature(c, opts);
  const std::size_t margin = boundary_margin(c, opts);
  Vec2 acc = Vec2::Zero();
  std::size_t count = 0;
  for (std::size_t i = margin; i + margin < c.size(); ++i, ++count) {
    const Vec2 M = j.kappa[i] * f.N[i] - j.d1[i] * f.T[i];
    acc += c.point(i) + M / fit.C;
  }
  return acc / static_cast<double>(count);
}

double full_affine_length(const CurveSamples& c, const FdOptions& opts) {
  const FrameField f = frame_and_curvature(c, opts);
  std::vector<double> r(c.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(f.kappa[i] > 0.0)) {
      throw Error(ErrorCode::NegativeCurvature, "kappa must be positive for the full-affine length");
    }
    r[i] = std::sqrt(f.kappa[i]);
  }
  return integrate(r, c.spacing(), c.closed);
}

Functionals functionals(const CurveSamples& c, const FdOptions& opts) {
  const FrameField f = frame_and_curvature(c, opts);
  const double h = c.spacing();
  Functionals out;
  out.length = c.closed ? h * static_cast<double>(c.size()) : c.s.back() - c.s.front();
  out.total_curvature = integrate(f.kappa, h, c.closed);
  if (c.closed) {
    double acc = 0.0;
    if (c.derivatives) {
      for (std::size_t i = 0; i < c.size(); ++i) acc += det2(c.point(i), f.T[i]);
      out.area = 0.5 * h * acc;
    } else {
      for (std::size_t i = 0; i < c.size(); ++i) {
        const std::size_t k = (i + 1) % c.size();
        acc += c.x[i] * c.y[k] - c.x[k] * c.y[i];
      }
      out.area = 0.5 * acc;
    }
  }
  if (*std::min_element(f.kappa.begin(), f.kappa.end()) > 0.0) {
    std::vector<double> r(c.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(f.kappa[i]);
    out.full_affine_length = integrate(r, h, c.closed);
  }
  return out;
}

SextacticCount sextactic_points(const CurveSamples& c, const FdOptions& opts) {
  const CurvatureJet j = curvature_jet(c, opts);
  const std::size_t margin = boundary_margin(c, opts);
  double kmax = 0.0, dmax = 0.0;
  for (std::size_t i = margin; i + margin < c.size(); ++i) {
    kmax = std::max(kmax, std::abs(j.kappa[i]));
    dmax = std::max(dmax, std::abs(j.d1[i]));
  }
  SextacticCount out;
  if (dmax < 1e-7 * (1.0 + kmax)) {
    out.constant_curvature = true;
    return out;
  }
  const double thr = 1e-6 * dmax;
  int first = 0, last = 0;
  for (std::size_t i = margin; i + margin < c.size(); ++i) {
    const double v = j.d1[i];
    if (std::abs(v) < thr) continue;
    const int sg = v > 0.0 ? 1 : -1;
    if (first == 0) first = sg;
    else if (sg != last) ++out.sign_changes;
    last = sg;
  }
  if (c.closed && first != 0 && last != first) ++out.sign_changes;
  return out;
}

}  // namespace affine_elastica
