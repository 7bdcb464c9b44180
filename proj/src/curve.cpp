#include "affine_elastica/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "affine_elastica/error.hpp"

namespace affine_elastica {

double CurveSamples::spacing() const {
  if (s.size() < 2) return 0.0;
  return (s.back() - s.front()) / static_cast<double>(s.size() - 1);
}

double CurveSamples::diameter() const {
  if (x.empty()) return 0.0;
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  const auto [ymin, ymax] = std::minmax_element(y.begin(), y.end());
  return std::hypot(*xmax - *xmin, *ymax - *ymin);
}

void CurveSamples::validate() const {
  if (x.size() != s.size() || y.size() != s.size()) {
    throw Error(ErrorCode::InvalidParameter, "sample arrays differ in length");
  }
  if (s.size() < 7) {
    throw Error(ErrorCode::InvalidParameter, "at least 7 samples are required");
  }
  const double h = spacing();
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidParameter, "parameter must be increasing");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (std::abs((s[i] - s[i - 1]) - h) > 1e-6 * h) {
      std::ostringstream os;
      os << "non-uniform spacing at sample " << i;
      throw Error(ErrorCode::InvalidParameter, os.str());
    }
  }
  if (derivatives && (derivatives->d1.size() != s.size() || derivatives->d2.size() != s.size() ||
                      derivatives->d3.size() != s.size())) {
    throw Error(ErrorCode::InvalidParameter, "derivative arrays differ in length");
  }
}

CurveSamples sample_curve(const ParametricCurve& curve, double s0, double length, std::size_t n,
                          bool closed) {
  if (n < 7) throw Error(ErrorCode::InvalidParameter, "at least 7 samples are required");
  CurveSamples c;
  c.closed = closed;
  if (closed) c.period = length;
  const double h = closed ? length / static_cast<double>(n) : length / static_cast<double>(n - 1);
  c.s.resize(n);
  c.x.resize(n);
  c.y.resize(n);
  CurveSamples::Derivatives d;
  d.d1.resize(n);
  d.d2.resize(n);
  d.d3.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double si = s0 + h * static_cast<double>(i);
    const CurveJet j = curve(si);
    c.s[i] = si;
    c.x[i] = j.p.x();
    c.y[i] = j.p.y();
    d.d1[i] = j.d1;
    d.d2[i] = j.d2;
    d.d3[i] = j.d3;
  }
  c.derivatives = std::move(d);
  return c;
}

CurveSamples transform(const CurveSamples& c, const Mat2& A, const Vec2& b) {
  CurveSamples out = c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 p = A * c.point(i) + b;
    out.x[i] = p.x();
    out.y[i] = p.y();
  }
  if (c.derivatives && std::abs(A.determinant() - 1.0) < 1e-12) {
    for (std::size_t i = 0; i < c.size(); ++i) {
      out.derivatives->d1[i] = A * c.derivatives->d1[i];
      out.derivatives->d2[i] = A * c.derivatives->d2[i];
      out.derivatives->d3[i] = A * c.derivatives->d3[i];
    }
  } else {
    out.derivatives.reset();
  }
  return out;
}

CurveSamples affine_image(const CurveSamples& c, const Mat2& A, const Vec2& b) {
  const double D = A.determinant();
  if (!(std::abs(D) > 0.0) || !std::isfinite(D)) {
    throw Error(ErrorCode::InvalidParameter, "affine_image needs an invertible map");
  }
  const double lam = std::cbrt(std::abs(D));
  const bool flip = D < 0.0;
  const std::size_t n = c.size();
  CurveSamples out = c;
  out.display_normalized = false;
  if (c.period) out.period = *c.period * lam;
  // Node k of the output is node src(k) of the input.
  auto src = [&](std::size_t k) {
    if (!flip) return k;
    return c.closed ? (n - k) % n : n - 1 - k;
  };
  for (std::size_t k = 0; k < n; ++k) {
    out.s[k] = c.s.front() * lam + static_cast<double>(k) * c.spacing() * lam;
    const Vec2 p = A * c.point(src(k)) + b;
    out.x[k] = p.x();
    out.y[k] = p.y();
  }
  if (c.derivatives) {
    const double sg = flip ? -1.0 : 1.0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = src(k);
      out.derivatives->d1[k] = sg * (A * c.derivatives->d1[i]) / lam;
      out.derivatives->d2[k] = (A * c.derivatives->d2[i]) / (lam * lam);
      out.derivatives->d3[k] = sg * (A * c.derivatives->d3[i]) / (lam * lam * lam);
    }
  }
  return out;
}

namespace fd {

std::vector<double> weights(std::span<const double> xs, double x0, int order) {
  const int n = static_cast<int>(xs.size()) - 1;
  const int m = order;
  // c[i][k]: weight of node i for derivative k.
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[i] = c[i][m];
  return w;
}

std::vector<double> derivative(std::span<const double> f, double h, int order, bool periodic,
                               int stride, int width) {
  const int kWidth = width;
  const int kHalf = kWidth / 2;
  if (width < order + 1 || width % 2 == 0) {
    throw Error(ErrorCode::InvalidParameter, "stencil width must be odd and exceed the order");
  }
  const long n = static_cast<long>(f.size());
  if (stride < 1) stride = 1;
  if (n < static_cast<long>(kWidth) * stride) {
    throw Error(ErrorCode::InvalidParameter, "too few samples for the finite-difference stencil");
  }
  const double H = h * stride;
  // Weights for each offset of the stencil window relative to the node.
  std::vector<std::vector<double>> table(kWidth);
  for (int shift = 0; shift < kWidth; ++shift) {
    std::vector<double> xs(kWidth);
    for (int k = 0; k < kWidth; ++k) xs[k] = static_cast<double>(k - shift);
    table[shift] = weights(xs, 0.0, order);
  }
  const double scale = std::pow(H, -order);
  std::vector<double> out(f.size());
  for (long i = 0; i < n; ++i) {
    int shift = kHalf;
    if (!periodic) {
      const long left = i / stride;
      const long right = (n - 1 - i) / stride;
      if (left < kHalf) shift = static_cast<int>(left);
      if (right < kHalf) shift = kWidth - 1 - static_cast<int>(right);
    }
    double acc = 0.0;
    for (int k = 0; k < kWidth; ++k) {
      long idx = i + static_cast<long>(k - shift) * stride;
      if (periodic) idx = ((idx % n) + n) % n;
      acc += table[shift][k] * f[idx];
    }
    out[i] = acc * scale;
  }
  return out;
}

}  // namespace fd

double integrate(std::span<const double> f, double h, bool periodic) {
  const std::size_t n = f.size();
  if (n == 0) return 0.0;
  if (periodic) {
    double acc = 0.0;
    for (double v : f) acc += v;
    return acc * h;
  }
  if (n == 1) return 0.0;
  if (n == 2) return 0.5 * h * (f[0] + f[1]);
  auto simpson = [&](std::size_t a, std::size_t b) {
    // b - a even
    double acc = f[a] + f[b];
    for (std::size_t i = a + 1; i < b; ++i) acc += (((i - a) % 2) ? 4.0 : 2.0) * f[i];
    return acc * h / 3.0;
  };
  const std::size_t intervals = n - 1;
  if (intervals % 2 == 0) return simpson(0, n - 1);
  if (intervals == 3) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
  // Simpson 3/8 on the last three intervals.
  const std::size_t m = n - 4;
  return simpson(0, m) + 3.0 * h / 8.0 * (f[m] + 3.0 * f[m + 1] + 3.0 * f[m + 2] + f[m + 3]);
}

std::vector<double> cumulative_integral(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  if (n < 6) {
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * h * (f[i - 1] + f[i]);
    return out;
  }
  constexpr int kW = 6;
  static const double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                               0.8611363115940526};
  static const double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                               0.3478548451374538};
  // Each step integrates the quintic through six neighbouring nodes.
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t a = (i >= 3) ? i - 3 : 0;
    if (a + kW > n) a = n - kW;
    const double t0 = static_cast<double>(i - 1 - a);
    double acc = 0.0;
    for (int k = 0; k < kW; ++k) {
      double integral = 0.0;
      for (int g = 0; g < 4; ++g) {
        const double t = t0 + 0.5 * (gx[g] + 1.0);
        double basis = 1.0;
        for (int j = 0; j < kW; ++j) {
          if (j != k) basis *= (t - j) / static_cast<double>(k - j);
        }
        integral += 0.5 * gw[g] * basis;
      }
      acc += integral * f[a + k];
    }
    out[i] = out[i - 1] + acc * h;
  }
  return out;
}

}  // namespace affine_elastica
