#include "affine_elastica/synthesis.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>

#include "affine_elastica/curvature.hpp"
#include "affine_elastica/error.hpp"

namespace affine_elastica {

namespace {

using std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

struct ComplexJet {
  Complex v, d1, d2, d3;
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Root of f on [lo, hi]; nullopt when f does not change sign.
template <class F>
std::optional<double> bracketed_root(F f, double lo, double hi) {
  const double flo = f(lo), fhi = f(hi);
  if (!std::isfinite(flo) || !std::isfinite(fhi)) return std::nullopt;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) return std::nullopt;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

// sigma(z + a)/sigma(z) exp(k z) and its first three derivatives.
ComplexJet hermite_jet(const Weierstrass& w, Complex z, Complex a, Complex k) {
  const double w1 = w.lattice().w1;
  if (w.pole_distance(z + a) < 1e-2 * w1) {
    // Near a zero of sigma(z + a) the logarithmic derivative blows up, so the
    // jet comes from Cauchy's formula on a circle around z instead.
    const double r = std::min(0.1 * w1, 0.3 * w.pole_distance(z));
    constexpr int N = 64;
    std::array<Complex, 4> acc{};
    for (int m = 0; m < N; ++m) {
      const Complex e = std::polar(1.0, 2.0 * pi * m / N);
      const Complex zm = z + r * e;
      const Complex f = std::exp(w.log_sigma(zm + a) - w.log_sigma(zm) + k * zm);
      Complex em = 1.0;
      for (int j = 0; j < 4; ++j) {
        acc[j] += f * em;
        em /= e;
      }
    }
    const double fact[4] = {1.0, 1.0, 2.0, 6.0};
    for (int j = 0; j < 4; ++j) acc[j] *= fact[j] / (N * std::pow(r, j));
    return {acc[0], acc[1], acc[2], acc[3]};
  }
  const Complex H = std::exp(w.log_sigma(z + a) - w.log_sigma(z) + k * z);
  const Complex L = w.zeta(z + a) - w.zeta(z) + k;
  const Complex L1 = w.wp(z) - w.wp(z + a);
  const Complex L2 = w.wp_prime(z) - w.wp_prime(z + a);
  return {H, H * L, H * (L * L + L1), H * (L * L * L + 3.0 * L * L1 + L2)};
}

Complex lame_k(const Weierstrass& w, Complex c) {
  return -w.wp_prime(c) / (2.0 * w.wp(c)) - w.zeta(c);
}

// Poles of wp(s - c0) on the real s axis.
void set_elliptic_poles(AnalyticCurve& a, const Weierstrass& w, Complex c0) {
  const double w1 = w.lattice().w1;
  const double tol = 1e-9 * std::max(1.0, w1);
  a.kappa_period = 2.0 * w1;
  if (w.pole_distance(-c0) < tol) {
    a.pole_origin = 0.0;
    a.pole_spacing = 2.0 * w1;
  } else if (w.pole_distance(w1 - c0) < tol) {
    a.pole_origin = w1;
    a.pole_spacing = 2.0 * w1;
  }
}

// Turns two complex solutions of xi''' + kappa xi' = 0 (kappa real) into a
// unimodular real curve. The four real and imaginary parts all solve the
// same real equation; the pair with the best conditioned Wronskian at
// s_ref is kept, preferring the parts of the first solution.
class Realifier {
 public:
  using Source = std::function<std::array<ComplexJet, 2>(double)>;

  Realifier(Source src, double s_ref) : src_(std::move(src)) {
    const auto jets = src_(s_ref);
    std::array<std::array<double, 2>, 4> d{};
    std::array<bool, 4> usable{};
    for (int k = 0; k < 2; ++k) {
      d[2 * k] = {jets[k].d1.real(), jets[k].d2.real()};
      d[2 * k + 1] = {jets[k].d1.imag(), jets[k].d2.imag()};
      // A part at rounding level of its complex function carries no signal.
      const double whole = std::hypot(std::abs(jets[k].d1), std::abs(jets[k].d2));
      for (int r = 0; r < 2; ++r) {
        usable[2 * k + r] = std::hypot(d[2 * k + r][0], d[2 * k + r][1]) > 1e-6 * whole;
      }
    }
    auto measure = [&](int i, int j) {
      if (!usable[i] || !usable[j]) return 0.0;
      const double W = d[i][0] * d[j][1] - d[i][1] * d[j][0];
      const double scale = std::abs(d[i][0] * d[j][1]) + std::abs(d[i][1] * d[j][0]);
      return scale > 0 ? std::abs(W) / scale : 0.0;
    };
    double best = measure(0, 1);
    i_ = 0;
    j_ = 1;
    if (best < 1e-3) {
      for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
          if (measure(i, j) > best) {
            best = measure(i, j);
            i_ = i;
            j_ = j;
          }
        }
      }
    }
    if (!(best > 1e-8)) {
      throw Error(ErrorCode::UnimodularizationFailed,
                  "no independent pair of real solutions was found");
    }
    const double W = d[i_][0] * d[j_][1] - d[i_][1] * d[j_][0];
    scale_ = 1.0 / std::sqrt(std::abs(W));
    sign_ = W > 0 ? 1.0 : -1.0;
  }

  bool real_imaginary_form() const { return i_ == 0 && j_ == 1; }

  CurveJet operator()(double s) const {
    const auto jets = src_(s);
    auto part = [&](int idx, auto member) {
      const Complex v = jets[idx / 2].*member;
      return idx % 2 == 0 ? v.real() : v.imag();
    };
    CurveJet j;
    const double a = scale_, b = sign_ * scale_;
    j.p = {a * part(i_, &ComplexJet::v), b * part(j_, &ComplexJet::v)};
    j.d1 = {a * part(i_, &ComplexJet::d1), b * part(j_, &ComplexJet::d1)};
    j.d2 = {a * part(i_, &ComplexJet::d2), b * part(j_, &ComplexJet::d2)};
    j.d3 = {a * part(i_, &ComplexJet::d3), b * part(j_, &ComplexJet::d3)};
    return j;
  }

 private:
  Source src_;
  int i_ = 0, j_ = 1;
  double scale_ = 1.0, sign_ = 1.0;
};

// Normalises a real curve with constant |x', x''| by scaling, and mirrors
// it when the orientation is negative.
ParametricCurve unimodular(ParametricCurve raw, double s_ref) {
  const CurveJet j = raw(s_ref);
  const double W = det2(j.d1, j.d2);
  if (!(std::abs(W) > 0) || !std::isfinite(W)) {
    throw Error(ErrorCode::UnimodularizationFailed, "vanishing Wronskian");
  }
  const double a = 1.0 / std::sqrt(std::abs(W));
  const double sx = W > 0 ? a : -a;
  return [raw = std::move(raw), a, sx](double s) {
    CurveJet j = raw(s);
    for (Vec2* v : {&j.p, &j.d1, &j.d2, &j.d3}) {
      v->x() *= sx;
      v->y() *= a;
    }
    return j;
  };
}

AnalyticCurve generic_curve(const CaseLabel& label) {
  const auto p = lame_params(label);
  auto w = std::make_shared<const Weierstrass>(p.inv);
  const Complex c = p.c, c0 = p.c0, k = lame_k(*w, c);
  AnalyticCurve a;
  set_elliptic_poles(a, *w, c0);
  a.s_ref = (p.z0 + c0).real();
  Realifier real(
      [w, c, c0, k](double s) {
        const Complex z = Complex(s) - c0;
        return std::array<ComplexJet, 2>{hermite_jet(*w, z, c, k), hermite_jet(*w, z, -c, -k)};
      },
      a.s_ref);
  a.metadata["form"] = real.real_imaginary_form() ? "real-imaginary" : "mixed";
  a.metadata["c_re"] = fmt(c.real());
  a.metadata["c_im"] = fmt(c.imag());
  a.curve = real;
  a.kappa = [w, c0](double s) { return -6.0 * w->wp(Complex(s) - c0).real(); };
  return a;
}

// A2, B2, C3: g3 = 0, so one root e_j vanishes and
// sigma(z + w_j)/sigma(z) exp(-eta_j z) is a multiple of sqrt(wp(z)).
AnalyticCurve cosigma_curve(const CaseLabel& label) {
  auto w = std::make_shared<const Weierstrass>(label.invariants);
  const auto& lat = w->lattice();
  const Complex c0 = label.tag == CaseTag::A2 ? lat.w2() : Complex(0.0);
  Complex omega = lat.w1;
  double best = std::abs(w->wp(omega));
  for (Complex cand : {lat.w2(), lat.w1 + lat.w2()}) {
    if (w->pole_distance(cand) < 1e-6 * lat.w1) continue;  // w1 + w2 is a period when Delta < 0
    const double v = std::abs(w->wp(cand));
    if (v < best) {
      best = v;
      omega = cand;
    }
  }
  const Complex eta = 0.5 * w->quasi_period(2.0 * omega);
  AnalyticCurve a;
  set_elliptic_poles(a, *w, c0);
  a.s_ref = label.tag == CaseTag::A2 ? 0.0 : lat.w1;
  const ComplexJet ref = hermite_jet(*w, Complex(a.s_ref) - c0, omega, -eta);
  const Complex phase = std::abs(ref.v) / ref.v;
  auto raw = [w, c0, omega, eta, phase](double s) {
    const ComplexJet g = hermite_jet(*w, Complex(s) - c0, omega, -eta);
    const double r = (phase * g.v).real(), r1 = (phase * g.d1).real();
    const double r2 = (phase * g.d2).real(), r3 = (phase * g.d3).real();
    CurveJet j;
    j.p = {r, r * s};
    j.d1 = {r1, r1 * s + r};
    j.d2 = {r2, r2 * s + 2.0 * r1};
    j.d3 = {r3, r3 * s + 3.0 * r2};
    return j;
  };
  a.curve = unimodular(raw, a.s_ref);
  a.kappa = [w, c0](double s) { return -6.0 * w->wp(Complex(s) - c0).real(); };
  if (label.tag == CaseTag::A2) a.metadata["sign_flip_at_poles"] = "true";
  return a;
}

AnalyticCurve case_d(const CaseLabel& label) {
  const double E = *label.params.E;
  const double a = std::sqrt(-1.5 * E), b = std::sqrt(2.0) * a, r2 = std::sqrt(2.0);
  const bool coth = label.tag == CaseTag::Da;
  auto u_of = [a, coth](double s) { return coth ? 1.0 / std::tanh(a * s) : std::tanh(a * s); };
  AnalyticCurve out;
  if (coth) out.pole_origin = 0.0;
  out.s_ref = coth ? 1.0 / a : 0.0;
  out.kappa = [E, u_of](double s) {
    const double u = u_of(s);
    return 9.0 * E * u * u - 6.0 * E;
  };
  auto kappa = out.kappa;
  auto raw = [=](double s) {
    const double u = u_of(s), du = a * (1.0 - u * u);
    const double ep = std::exp(b * s), em = std::exp(-b * s);
    const double q1 = 1.0 - 3.0 * r2 * u + 3.0 * u * u;
    const double q2 = 1.0 + 3.0 * r2 * u + 3.0 * u * u;
    const double k = kappa(s);
    CurveJet j;
    j.p = {ep / a * (2.0 * r2 - 3.0 * u), -em / a * (2.0 * r2 + 3.0 * u)};
    j.d1 = {ep * q1, em * q2};
    j.d2 = {ep * (b * q1 + du * (-3.0 * r2 + 6.0 * u)), em * (-b * q2 + du * (3.0 * r2 + 6.0 * u))};
    j.d3 = -k * j.d1;
    return j;
  };
  out.curve = unimodular(raw, out.s_ref);
  return out;
}

AnalyticCurve case_e(const CaseLabel& label) {
  const double E = *label.params.E;
  const double a = std::sqrt(1.5 * E), b = std::sqrt(2.0) * a, r2 = std::sqrt(2.0);
  AnalyticCurve out;
  out.pole_origin = pi / (2.0 * a);
  out.pole_spacing = pi / a;
  out.kappa_period = pi / a;
  out.s_ref = 0.0;
  out.kappa = [E, a](double s) {
    const double t = std::tan(a * s);
    return -9.0 * E * t * t - 6.0 * E;
  };
  auto kappa = out.kappa;
  auto raw = [=](double s) {
    const double t = std::tan(a * s), dt = a * (1.0 + t * t);
    const Complex e = std::exp(-kI * b * s);
    const Complex Z = e * (4.0 * kI / b - 3.0 * t / a);
    const Complex Z1 = e * (1.0 + 3.0 * r2 * kI * t - 3.0 * t * t);
    const Complex Z2 =
        e * (-kI * b * (1.0 + 3.0 * r2 * kI * t - 3.0 * t * t) + dt * (3.0 * r2 * kI - 6.0 * t));
    const Complex Z3 = -kappa(s) * Z1;
    CurveJet j;
    j.p = {Z.real(), Z.imag()};
    j.d1 = {Z1.real(), Z1.imag()};
    j.d2 = {Z2.real(), Z2.imag()};
    j.d3 = {Z3.real(), Z3.imag()};
    return j;
  };
  out.curve = unimodular(raw, out.s_ref);
  return out;
}

AnalyticCurve ellipse_curve(const CaseLabel& label) {
  const double k0 = 3.0 * *label.params.E;
  const double om = std::sqrt(k0), R = std::pow(k0, -0.75);
  AnalyticCurve out;
  out.kappa = [k0](double) { return k0; };
  out.metadata["period"] = fmt(2.0 * pi / om);
  out.kappa_period = 2.0 * pi / om;
  out.curve = [om, R](double s) {
    const double c = std::cos(om * s), sn = std::sin(om * s);
    CurveJet j;
    j.p = {R * c, R * sn};
    j.d1 = {-R * om * sn, R * om * c};
    j.d2 = -om * om * j.p;
    j.d3 = -om * om * j.d1;
    j.d4 = om * om * om * om * j.p;
    return j;
  };
  return out;
}

AnalyticCurve case_f(const CaseLabel& label) {
  auto w = std::make_shared<const Weierstrass>(label.invariants);
  const double g2 = label.invariants.g2();
  AnalyticCurve out;
  set_elliptic_poles(out, *w, 0.0);
  out.s_ref = w->lattice().w1;
  auto raw = [w, g2](double s) {
    const double P = w->wp(s).real(), P1 = w->wp_prime(s).real(), Z = w->zeta(s).real();
    const double P2 = 6.0 * P * P - 0.5 * g2;
    CurveJet j;
    j.p = {Z, P - Z * Z};
    j.d1 = {-P, P1 + 2.0 * Z * P};
    j.d2 = {-P1, 4.0 * P * P - 0.5 * g2 + 2.0 * Z * P1};
    j.d3 = {-P2, 6.0 * P * P1 + 2.0 * Z * P2};
    return j;
  };
  out.curve = unimodular(raw, out.s_ref);
  out.kappa = [w](double s) { return -6.0 * w->wp(s).real(); };
  return out;
}

AnalyticCurve case_g() {
  const double al = 1.0 / std::sqrt(20.0);
  AnalyticCurve out;
  out.pole_origin = 0.0;
  out.s_ref = 1.0;
  out.kappa = [](double s) { return -6.0 / (s * s); };
  out.curve = [al](double s) {
    CurveJet j;
    const double s2 = s * s;
    j.p = {al * s2 * s2, al / s};
    j.d1 = {4.0 * al * s2 * s, -al / s2};
    j.d2 = {12.0 * al * s2, 2.0 * al / (s2 * s)};
    j.d3 = {24.0 * al * s, -6.0 * al / (s2 * s2)};
    return j;
  };
  return out;
}

std::optional<double> nearest_pole_inside(const AnalyticCurve& a, double lo, double hi) {
  if (!a.pole_origin) return std::nullopt;
  if (!a.pole_spacing) {
    if (*a.pole_origin >= lo && *a.pole_origin <= hi) return *a.pole_origin;
    return std::nullopt;
  }
  const double sp = *a.pole_spacing;
  const double k = std::ceil((lo - *a.pole_origin) / sp);
  const double pole = *a.pole_origin + k * sp;
  if (pole <= hi) return pole;
  return std::nullopt;
}

// Lagrange interpolation of v at fractional index t from the nodes
// first .. first + m - 1 (indices wrapped for periodic data).
double lagrange(std::span<const double> v, long first, int m, double t, bool periodic) {
  const long n = static_cast<long>(v.size());
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double w = 1.0;
    for (int j = 0; j < m; ++j) {
      if (j != i) w *= (t - (first + j)) / static_cast<double>(i - j);
    }
    long idx = first + i;
    if (periodic) idx = ((idx % n) + n) % n;
    acc += w * v[static_cast<std::size_t>(idx)];
  }
  return acc;
}

}  // namespace

ComplexPoint find_c(const Weierstrass& w, double value) {
  const auto& lat = w.lattice();
  const double w1 = lat.w1, w2 = lat.w2_im;
  const double eps = 1e-4;
  std::function<Complex(double)> line;
  double lo = 0.0, hi = 0.0;
  if (w.invariants().discriminant() > 0) {
    const double e1 = lat.roots[0].real(), e2 = lat.roots[1].real(), e3 = lat.roots[2].real();
    if (value >= e1) {
      line = [](double t) { return Complex(t); };
      lo = eps * w1;
      hi = w1;
    } else if (value >= e2) {
      line = [w1](double t) { return Complex(w1, -t); };
      hi = w2;
    } else if (value >= e3) {
      line = [w2](double t) { return Complex(t, w2); };
      hi = w1;
    } else {
      line = [](double t) { return Complex(0.0, t); };
      lo = eps * w2;
      hi = w2;
    }
  } else {
    if (value >= lat.roots[1].real()) {
      line = [](double t) { return Complex(t); };
      lo = eps * w1;
      hi = w1;
    } else {
      line = [](double t) { return Complex(0.0, t); };
      lo = eps * w2;
      hi = w2;
    }
  }
  auto f = [&](double t) { return w.wp(line(t)).real() - value; };
  const auto t = bracketed_root(f, lo, hi);
  if (!t) {
    std::ostringstream os;
    os << "wp(c) = " << value << " has no root on the searched line";
    throw Error(ErrorCode::NoSuchC, os.str());
  }
  return line(*t);
}

LameSolutionParams lame_params(const CaseLabel& label) {
  const double g2 = label.invariants.g2(), g3 = label.invariants.g3();
  switch (label.tag) {
    case CaseTag::A1:
    case CaseTag::A3:
    case CaseTag::B1:
    case CaseTag::B3:
    case CaseTag::C1:
    case CaseTag::C2:
    case CaseTag::C4:
    case CaseTag::C5:
      break;
    default:
      throw Error(ErrorCode::InvalidParameter,
                  std::string("no Lame construction for case ") + std::string(tag_name(label.tag)));
  }
  const Weierstrass w(label.invariants);
  LameSolutionParams p;
  p.inv = label.invariants;
  p.c = find_c(w, -g3 / g2);
  const bool closed = label.tag == CaseTag::A1 || label.tag == CaseTag::A3;
  p.c0 = closed ? w.lattice().w2() : Complex(0.0);
  const double s_ref = closed ? 0.0 : w.lattice().w1;
  p.z0 = Complex(s_ref) - p.c0;
  return p;
}

ComplexPoint lame_primitive(ComplexPoint z, const LameSolutionParams& p) {
  const Weierstrass w(p.inv);
  return std::exp(w.log_sigma(z + p.c) - w.log_sigma(z) + lame_k(w, p.c) * z);
}

ComplexPoint lame_phi1(ComplexPoint z, const LameSolutionParams& p) {
  const Weierstrass w(p.inv);
  return hermite_jet(w, z, p.c, lame_k(w, p.c)).d1;
}

ComplexPoint lame_phi2(ComplexPoint z, const LameSolutionParams& p) {
  const Weierstrass w(p.inv);
  const Complex k = lame_k(w, p.c);
  auto phi1 = [&](Complex v) { return hermite_jet(w, v, p.c, k).d1; };
  const double scale = std::min(std::abs(w.omega()), std::abs(w.omega_prime()));

  // 1/phi1^2 has zero residues, so the integral does not depend on the path
  // as long as it avoids the zeros of phi1 and the lattice.
  std::vector<std::vector<Complex>> paths{{p.z0, z}};
  for (double h : {0.15, -0.15, 0.3, -0.3}) {
    const Complex up(0.0, h * scale);
    paths.push_back({p.z0, p.z0 + up, z + up, z});
  }
  auto clearance = [&](const std::vector<Complex>& path) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t j = 0; j + 1 < path.size(); ++j) {
      const int n = std::max(8, static_cast<int>(std::ceil(std::abs(path[j + 1] - path[j]) / 0.01)));
      for (int i = 0; i <= n; ++i) {
        const Complex v = path[j] + (path[j + 1] - path[j]) * (static_cast<double>(i) / n);
        if (w.pole_distance(v) < 0.05 * scale) return 0.0;
        const double f = std::abs(phi1(v));
        lo = std::min(lo, f);
        hi = std::max(hi, f);
      }
    }
    return hi > 0 ? lo / hi : 0.0;
  };
  const std::vector<Complex>* best = nullptr;
  double best_clear = -1.0;
  for (const auto& path : paths) {
    const double cl = clearance(path);
    if (cl > best_clear) {
      best_clear = cl;
      best = &path;
    }
    if (&path == &paths.front() && cl > 0.1) break;
  }
  if (!(best_clear > 1e-8)) {
    throw Error(ErrorCode::PathThroughZero, "phi1 vanishes on every integration path");
  }

  using G = boost::math::quadrature::gauss<double, 20>;
  const auto& x = G::abscissa();
  const auto& wt = G::weights();
  Complex integral = 0.0;
  for (std::size_t j = 0; j + 1 < best->size(); ++j) {
    const Complex from = (*best)[j], span = (*best)[j + 1] - from;
    const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(span) / 0.05)));
    const Complex h = span / static_cast<double>(panels);
    for (int q = 0; q < panels; ++q) {
      const Complex a = from + h * static_cast<double>(q);
      for (std::size_t i = 0; i < x.size(); ++i) {
        for (double sgn : {-1.0, 1.0}) {
          if (i == 0 && sgn < 0 && x[0] == 0.0) continue;
          const Complex f = phi1(a + 0.5 * h * (1.0 + sgn * x[i]));
          integral += 0.5 * h * wt[i] / (f * f);
        }
      }
    }
  }
  return phi1(z) * integral;
}

AnalyticCurve analytic_curve(const CaseLabel& label) {
  AnalyticCurve a;
  switch (label.tag) {
    case CaseTag::A2:
    case CaseTag::B2:
    case CaseTag::C3:
      a = cosigma_curve(label);
      break;
    case CaseTag::Da:
    case CaseTag::Dc:
      a = case_d(label);
      break;
    case CaseTag::E_case:
      a = case_e(label);
      break;
    case CaseTag::Ellipse:
      a = ellipse_curve(label);
      break;
    case CaseTag::F:
      a = case_f(label);
      break;
    case CaseTag::G:
      a = case_g();
      break;
    default:
      a = generic_curve(label);
  }
  a.metadata["case"] = std::string(tag_name(label.tag));
  a.metadata["branch"] = std::string(branch_name(label.branch));
  a.metadata["g2"] = fmt(label.invariants.g2());
  a.metadata["g3"] = fmt(label.invariants.g3());
  return a;
}

AnalyticCurve analytic_length_constrained(double A, double g3, ComplexPoint c0) {
  const double g2 = A * A / 12.0;
  auto w = std::make_shared<const Weierstrass>(Invariants(g2, g3));
  AnalyticCurve a;
  set_elliptic_poles(a, *w, c0);
  a.s_ref = a.pole_origin ? *a.pole_origin + w->lattice().w1 : 0.0;
  auto src = [w, A, g2, c0](double s) {
    const Complex z = Complex(s) - c0;
    const Complex P = w->wp(z), P1 = w->wp_prime(z), Z = w->zeta(z);
    const Complex P2 = 6.0 * P * P - 0.5 * g2, P3 = 12.0 * P * P1;
    const double a12 = A / 12.0, a6 = A / 6.0;
    ComplexJet x{-Z + a12 * s, P + a12, P1, P2};
    ComplexJet y;
    y.v = a6 * Z * z + P - Z * Z - a12 * a12 * z * z;
    y.d1 = a6 * (Z - P * z) + P1 + 2.0 * Z * P - 2.0 * a12 * a12 * z;
    y.d2 = a6 * (-P1 * z - 2.0 * P) + P2 - 2.0 * P * P + 2.0 * Z * P1 - 2.0 * a12 * a12;
    y.d3 = a6 * (-P2 * z - 3.0 * P1) + P3 - 6.0 * P * P1 + 2.0 * Z * P2;
    return std::array<ComplexJet, 2>{x, y};
  };
  Realifier real(src, a.s_ref);
  a.curve = real;
  a.kappa = [w, A, c0](double s) { return -6.0 * w->wp(Complex(s) - c0).real() + 0.5 * A; };
  a.metadata["case"] = "length-constrained";
  a.metadata["A"] = fmt(A);
  a.metadata["g2"] = fmt(g2);
  a.metadata["g3"] = fmt(g3);
  return a;
}

SynthesisGrid default_grid(const AnalyticCurve& a, std::size_t n) {
  SynthesisGrid g;
  g.n = n;
  if (a.pole_origin && a.pole_spacing) {
    const double m = 0.2 * *a.pole_spacing;
    g.s0 = *a.pole_origin + m;
    g.length = *a.pole_spacing - 2.0 * m;
  } else if (a.pole_origin) {
    g.s0 = *a.pole_origin + 0.5;
    g.length = 3.5;
  } else if (a.kappa_period) {
    g.s0 = a.s_ref;
    g.length = *a.kappa_period;
    const auto it = a.metadata.find("case");
    g.closed = it != a.metadata.end() && it->second == "ellipse";
  } else {
    g.s0 = a.s_ref - 3.0;
    g.length = 6.0;
  }
  return g;
}

CurveSamples sample_analytic(const AnalyticCurve& a, const SynthesisGrid& grid) {
  if (!(grid.length > 0) || grid.n < 7) {
    throw Error(ErrorCode::InvalidParameter, "grid needs a positive length and at least 7 nodes");
  }
  if (const auto pole = nearest_pole_inside(a, grid.s0, grid.s0 + grid.length)) {
    std::ostringstream os;
    os << "the grid [" << grid.s0 << ", " << grid.s0 + grid.length
       << "] contains a curvature pole at s = " << *pole;
    throw Error(ErrorCode::GridHitsPole, os.str());
  }
  CurveSamples c = sample_curve(a.curve, grid.s0, grid.length, grid.n, grid.closed);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c.x[i]) || !std::isfinite(c.y[i])) {
      throw Error(ErrorCode::GridHitsPole, "non-finite sample at s = " + fmt(c.s[i]));
    }
  }
  for (const auto& [k, v] : a.metadata) c.metadata[k] = v;
  return c;
}

CurveSamples synthesize(const CaseLabel& label, const SynthesisGrid& grid) {
  return sample_analytic(analytic_curve(label), grid);
}

CurveSamples synthesize_length_constrained(double A, double g3, ComplexPoint c0,
                                           const SynthesisGrid& grid) {
  return sample_analytic(analytic_length_constrained(A, g3, c0), grid);
}

namespace {

struct ClosureEval {
  double lhs;
  double imag;
  Complex c;
};

ClosureEval closure_eval(double Q) {
  if (!(Q > 1.0)) throw Error(ErrorCode::InvalidParameter, "closure requires Q > 1");
  const Invariants inv = invariants_from_qQ(1.0, Q);
  const Weierstrass w(inv);
  const Complex c = find_c(w, -inv.g3() / inv.g2());
  // The conjugate representative -c (mod 2 w1) gives the positive orientation.
  const Complex cc = std::conj(c);
  const double w1 = w.lattice().w1;
  const Complex bracket =
      (w.wp_prime(cc) / (2.0 * w.wp(cc)) + w.zeta(cc)) * w1 - w.zeta(Complex(w1)) * cc;
  const Complex v = bracket * 2.0 * kI / pi;
  return {v.real(), v.imag(), c};
}

}  // namespace

double closure_lhs(double Q) {
  const auto e = closure_eval(Q);
  if (std::abs(e.imag) > 1e-8 * std::max(1.0, std::abs(e.lhs))) {
    throw Error(ErrorCode::InvalidParameter,
                "closure quantity has imaginary part " + fmt(e.imag));
  }
  return e.lhs;
}

ClosureSample closure_sample(double Q) {
  const auto e = closure_eval(Q);
  if (std::abs(e.imag) > 1e-8 * std::max(1.0, std::abs(e.lhs))) {
    throw Error(ErrorCode::InvalidParameter,
                "closure quantity has imaginary part " + fmt(e.imag));
  }
  return {Q, e.lhs, e.c.imag()};
}

ClosureSolution solve_closure(int m, int n) {
  if (m <= 0 || n <= 0) throw Error(ErrorCode::InvalidParameter, "m and n must be positive");
  const double target = static_cast<double>(n) / m;
  constexpr int kScan = 240;
  const double lo = std::log(1.0 + 1e-3), hi = std::log(1e3);
  auto g = [&](double Q) {
    try {
      return closure_eval(Q).lhs - target;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  double prevQ = std::exp(lo), prev = g(prevQ);
  for (int i = 1; i <= kScan; ++i) {
    const double Q = std::exp(lo + (hi - lo) * i / kScan);
    const double v = g(Q);
    if (std::isfinite(prev) && std::isfinite(v) && (prev > 0) != (v > 0)) {
      const auto root = bracketed_root(g, prevQ, Q);
      if (root) {
        ClosureSolution sol;
        sol.m = m;
        sol.n = n;
        sol.Q = *root;
        sol.inv = invariants_from_qQ(1.0, sol.Q);
        sol.lattice = half_periods(sol.inv);
        const auto e = closure_eval(sol.Q);
        sol.d = e.c.imag();
        sol.lhs = e.lhs;
        return sol;
      }
    }
    prevQ = Q;
    prev = v;
  }
  std::ostringstream os;
  os << "closure quantity never equals " << n << "/" << m << " for Q in [1.001, 1000]";
  throw Error(ErrorCode::NotBracketed, os.str());
}

double closure_period(const ClosureSolution& sol) {
  const double w1 = sol.lattice.w1;
  // X picks up exp(i pi n/m) per 2 w1, hence (-1)^n after 2 m w1.
  return (sol.n % 2 == 0 ? 2.0 : 4.0) * sol.m * w1;
}

CaseLabel closure_label(const ClosureSolution& sol) { return classify(sol.inv, Branch::Closed); }

double a3_nonperiodicity(double Q) {
  if (!(Q > 2.0)) throw Error(ErrorCode::InvalidParameter, "case A3 with q = -1 requires Q > 2");
  const Invariants inv = invariants_from_qQ(-1.0, Q);
  const Weierstrass w(inv);
  const double val = -inv.g3() / inv.g2();
  const Complex c = find_c(w, val);
  const Complex w2 = w.lattice().w2();
  const double d = (c - w2).real();
  const double w1 = w.lattice().w1;
  const Complex bracket = w1 * std::sqrt(val) - w.zeta(Complex(w1)) * d +
                          w1 * w.zeta(w2 + d) - w1 * w.zeta(w2);
  return bracket.real() * 2.0 / pi;
}

AffineMap fit_affine_map(std::span<const Vec2> src, std::span<const Vec2> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw Error(ErrorCode::InvalidParameter, "affine fit needs at least 3 matching points");
  }
  Eigen::MatrixXd M(src.size(), 3);
  Eigen::MatrixXd R(src.size(), 2);
  for (std::size_t i = 0; i < src.size(); ++i) {
    M.row(i) << src[i].x(), src[i].y(), 1.0;
    R.row(i) = dst[i].transpose();
  }
  const Eigen::MatrixXd X = M.colPivHouseholderQr().solve(R);
  AffineMap out;
  out.A = X.topRows(2).transpose();
  out.b = X.row(2).transpose();
  return out;
}

std::vector<Vec2> curvature_maxima(const CurveSamples& c) {
  c.validate();
  std::vector<double> kappa;
  if (c.derivatives) {
    kappa.resize(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
      kappa[i] = det2(c.derivatives->d2[i], c.derivatives->d3[i]);
    }
  } else {
    kappa = frame_and_curvature(c).kappa;
  }
  const auto [mn, mx] = std::minmax_element(kappa.begin(), kappa.end());
  if (*mx - *mn <= 1e-9 * std::max(1.0, std::abs(*mx))) return {};
  const double h = c.spacing();
  const auto dk = fd::derivative(kappa, h, 1, c.closed);
  const long n = static_cast<long>(c.size());
  const long margin = c.closed ? 0 : 4;
  std::vector<Vec2> out;
  for (long i = margin; i + 1 < n - margin + (c.closed ? 1 : 0); ++i) {
    const long j = (i + 1) % n;
    if (!(dk[i] > 0 && dk[j] <= 0)) continue;
    auto f = [&](double t) { return lagrange(dk, i - 2, 6, t, c.closed); };
    const auto t = bracketed_root(f, static_cast<double>(i), static_cast<double>(i + 1));
    if (!t) continue;
    out.emplace_back(lagrange(c.x, i - 3, 8, *t, c.closed), lagrange(c.y, i - 3, 8, *t, c.closed));
  }
  return out;
}

namespace {

// Symmetric M > 0 with A^T M A = M for an elliptic A, i.e. the quadratic
// form whose level sets A preserves.
std::optional<Mat2> invariant_form(const Mat2& A) {
  // Unknowns (m11, m12, m22); A^T M A - M = 0 gives three linear equations.
  Eigen::Matrix3d K;
  for (int j = 0; j < 3; ++j) {
    Mat2 E = Mat2::Zero();
    if (j == 0) E(0, 0) = 1.0;
    if (j == 1) E(0, 1) = E(1, 0) = 1.0;
    if (j == 2) E(1, 1) = 1.0;
    const Mat2 R = A.transpose() * E * A - E;
    K.col(j) << R(0, 0), R(0, 1), R(1, 1);
  }
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(K, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 1e-6 * sv(0))) return std::nullopt;
  const Eigen::Vector3d v = svd.matrixV().col(2);
  Mat2 M;
  M << v(0), v(1), v(1), v(2);
  if (M(0, 0) < 0) M = -M;
  if (M.determinant() <= 0 || M(0, 0) <= 0) return std::nullopt;
  return M;
}

struct Ellipse {
  Mat2 form;
  Vec2 centre;
};

// Conic through five or more points.
std::optional<Ellipse> conic_fit(const std::vector<Vec2>& pts) {
  Vec2 mean = Vec2::Zero();
  for (const auto& p : pts) mean += p;
  mean /= static_cast<double>(pts.size());
  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, (p - mean).norm());
  // a x^2 + b xy + c y^2 + d x + e y = 1 in centred, scaled coordinates.
  Eigen::MatrixXd M(pts.size(), 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 q = (pts[i] - mean) / scale;
    M.row(i) << q.x() * q.x(), q.x() * q.y(), q.y() * q.y(), q.x(), q.y();
  }
  const Eigen::VectorXd k = M.colPivHouseholderQr().solve(rhs);
  Mat2 Q;
  Q << k(0), 0.5 * k(1), 0.5 * k(1), k(2);
  if (!k.allFinite() || Q(0, 0) <= 0 || Q.determinant() <= 0) return std::nullopt;
  return Ellipse{Q, mean + scale * (-0.5 * Q.inverse() * Vec2(k(3), k(4)))};
}

// Three or four points p_0, p_1, ... permuted cyclically by an affine map:
// the ellipse invariant under that map.
std::optional<Ellipse> orbit_fit(const std::vector<Vec2>& pts) {
  std::vector<Vec2> next(pts.begin() + 1, pts.end());
  next.push_back(pts.front());
  const AffineMap psi = fit_affine_map(pts, next);
  const auto M = invariant_form(psi.A);
  const Mat2 I_A = Mat2::Identity() - psi.A;
  if (!M || std::abs(I_A.determinant()) < 1e-12) return std::nullopt;
  return Ellipse{*M, I_A.inverse() * psi.b};
}

}  // namespace

CurveSamples euclidean_display_transform(const CurveSamples& c, const ClosureSolution& sol) {
  const auto all = curvature_maxima(c);
  CurveSamples out = c;
  out.display_normalized = true;
  out.metadata["display_m"] = std::to_string(sol.m);
  if (all.empty()) {
    out.metadata["display_map"] = "identity";
    return out;
  }
  // A window of several periods repeats the maxima.
  double extent = c.diameter();
  std::vector<Vec2> pts;
  for (const auto& p : all) {
    const bool seen = std::any_of(pts.begin(), pts.end(),
                                  [&](const Vec2& q) { return (p - q).norm() < 1e-7 * extent; });
    if (!seen) pts.push_back(p);
  }
  std::optional<Ellipse> e;
  if (pts.size() >= 5) {
    e = conic_fit(pts);
  } else if (pts.size() >= 3 && c.closed) {
    e = orbit_fit(pts);
  } else {
    throw Error(ErrorCode::EllipseFitFailed,
                "only " + std::to_string(pts.size()) + " distinct curvature maxima found");
  }
  if (!e) throw Error(ErrorCode::EllipseFitFailed, "the curvature maxima do not lie on an ellipse");
  const Eigen::SelfAdjointEigenSolver<Mat2> eig(e->form);
  const Mat2 root = eig.operatorSqrt();
  const Mat2 L = root / std::sqrt(root.determinant());
  out = transform(c, L, -L * e->centre);
  out.display_normalized = true;
  out.metadata["display_m"] = std::to_string(sol.m);
  out.metadata["display_map"] = "ellipse-to-circle";
  return out;
}

}  // namespace affine_elastica
