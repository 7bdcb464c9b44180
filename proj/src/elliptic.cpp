#include "affine_elastica/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "affine_elastica/error.hpp"

namespace affine_elastica {

namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};

double agm(double a, double b) {
  for (int i = 0; i < 64 && std::abs(a - b) > 1e-16 * a; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return 0.5 * (a + b);
}

double polish_root(double t, double g2, double g3) {
  for (int i = 0; i < 4; ++i) {
    const double f = 4.0 * t * t * t - g2 * t - g3;
    const double df = 12.0 * t * t - g2;
    if (df == 0.0) break;
    const double step = f / df;
    t -= step;
    if (std::abs(step) <= 1e-17 * std::max(1.0, std::abs(t))) break;
  }
  return t;
}

}  // namespace

bool Invariants::degenerate(double rel_tol) const noexcept {
  const double scale = std::max(std::abs(g2_ * g2_ * g2_), 27.0 * g3_ * g3_);
  if (scale == 0.0) return true;
  return std::abs(delta_) < rel_tol * scale;
}

double LatticeData::real_root_at_w1() const noexcept {
  return roots[0].imag() == 0.0 && roots[2].imag() == 0.0 ? roots[0].real() : roots[1].real();
}

std::array<Complex, 3> cubic_roots(const Invariants& inv) {
  const double g2 = inv.g2();
  const double g3 = inv.g3();
  // Depressed form t^3 + p t + q = 0.
  const double p = -g2 / 4.0;
  const double q = -g3 / 4.0;
  if (inv.discriminant() > 0.0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    std::array<double, 3> t{};
    for (int k = 0; k < 3; ++k) {
      t[k] = polish_root(r * std::cos(theta - 2.0 * kPi * k / 3.0), g2, g3);
    }
    std::sort(t.begin(), t.end(), std::greater<>());
    return {Complex(t[0]), Complex(t[1]), Complex(t[2])};
  }
  const double disc = q * q / 4.0 + p * p * p / 27.0;
  const double sq = std::sqrt(std::max(disc, 0.0));
  double e = std::cbrt(-q / 2.0 + sq) + std::cbrt(-q / 2.0 - sq);
  e = polish_root(e, g2, g3);
  const double re = -e / 2.0;
  const double im = 0.5 * std::sqrt(std::max(3.0 * e * e - g2, 0.0));
  return {Complex(re, im), Complex(e), Complex(re, -im)};
}

double real_half_period(const Invariants& inv) {
  const auto r = cubic_roots(inv);
  if (inv.discriminant() > 0.0) {
    const double e1 = r[0].real(), e2 = r[1].real(), e3 = r[2].real();
    return kPi / (2.0 * agm(std::sqrt(e1 - e3), std::sqrt(e1 - e2)));
  }
  const double e = r[1].real();
  const double h = std::sqrt(3.0 * e * e - inv.g2() / 4.0);
  return kPi / agm(2.0 * std::sqrt(h), std::sqrt(2.0 * h + 3.0 * e));
}

Weierstrass::Weierstrass(const Invariants& inv) : inv_(inv) {
  if (inv.degenerate()) {
    std::ostringstream os;
    os << "discriminant " << inv.discriminant() << " vanishes for g2=" << inv.g2()
       << ", g3=" << inv.g3();
    throw Error(ErrorCode::DegenerateDiscriminant, os.str());
  }
  lattice_.roots = cubic_roots(inv);
  lattice_.w1 = real_half_period(inv);
  // wp(iy; g2, g3) = -wp(y; g2, -g3)
  lattice_.w2_im = real_half_period(Invariants(inv.g2(), -inv.g3()));

  const double w1 = lattice_.w1;
  const double w2 = lattice_.w2_im;
  if (inv.discriminant() > 0.0) {
    omega_ = w1;
    omega_p_ = Complex(0.0, w2);
  } else {
    omega_ = Complex(0.5 * w1, 0.5 * w2);
    omega_p_ = -w1;
  }
  // Gauss reduction of tau = omega'/omega into |Re tau| <= 1/2, |tau| >= 1.
  for (int iter = 0; iter < 100; ++iter) {
    tau_ = omega_p_ / omega_;
    const double k = std::round(tau_.real());
    omega_p_ -= k * omega_;
    tau_ = omega_p_ / omega_;
    if (std::abs(tau_) < 1.0 - 1e-14) {
      const Complex tmp = omega_;
      omega_ = omega_p_;
      omega_p_ = -tmp;
    } else {
      break;
    }
  }
  tau_ = omega_p_ / omega_;

  // Nome powers; terms decay like exp(-pi Im(tau) (n^2 - 1/4)) after argument reduction.
  terms_ = 1;
  while (terms_ < static_cast<int>(odd_coef_.size()) &&
         kPi * tau_.imag() * (terms_ * terms_ - 0.25) < 45.0) {
    ++terms_;
  }
  for (int n = 0; n < terms_; ++n) {
    const double h = n + 0.5;
    odd_coef_[n] = std::exp(kI * kPi * tau_ * (h * h));
    even_coef_[n] = std::exp(kI * kPi * tau_ * static_cast<double>(n * n));
  }
  Complex d1{0.0}, d3{0.0}, t2{0.0}, t3{1.0}, t4{1.0};
  for (int n = 0; n < terms_; ++n) {
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    const double k = 2.0 * n + 1.0;
    d1 += sgn * k * odd_coef_[n];
    d3 += sgn * k * k * k * odd_coef_[n];
    t2 += odd_coef_[n];
    if (n >= 1) {
      t3 += 2.0 * even_coef_[n];
      t4 += 2.0 * sgn * even_coef_[n];
    }
  }
  th1p0_ = 2.0 * d1;
  const Complex th1ppp0 = -2.0 * d3;
  th2_0_ = 2.0 * t2;
  th3_0_ = t3;
  th4_0_ = t4;
  const Complex a = kPi / (2.0 * omega_);
  e_omega_ = a * a * (std::pow(th3_0_, 4) + std::pow(th4_0_, 4)) / 3.0;
  eta_ = -(kPi * kPi / (12.0 * omega_)) * th1ppp0 / th1p0_;
  // Legendre relation eta omega' - eta' omega = i pi / 2.
  eta_p_ = (eta_ * omega_p_ - kI * kPi / 2.0) / omega_;

  const Complex a2 = 2.0 * omega_, b2 = 2.0 * omega_p_;
  reduce_det_ = a2.real() * b2.imag() - b2.real() * a2.imag();

  lattice_.eta1 = zeta(Complex(w1)).real();
}

Weierstrass::Reduced Weierstrass::reduce(Complex z) const {
  const Complex a2 = 2.0 * omega_, b2 = 2.0 * omega_p_;
  const double x = (z.real() * b2.imag() - b2.real() * z.imag()) / reduce_det_;
  const double y = (a2.real() * z.imag() - z.real() * a2.imag()) / reduce_det_;
  Reduced r;
  r.m = std::lround(x);
  r.n = std::lround(y);
  r.z0 = z - static_cast<double>(r.m) * a2 - static_cast<double>(r.n) * b2;
  return r;
}

Weierstrass::Thetas Weierstrass::thetas(Complex v) const {
  Thetas t{Complex(0.0), Complex(0.0), Complex(0.0), Complex(1.0), Complex(1.0)};
  for (int n = 0; n < terms_; ++n) {
    const double sgn = (n % 2 == 0) ? 1.0 : -1.0;
    const double k = 2.0 * n + 1.0;
    const Complex s = std::sin(k * v);
    const Complex c = std::cos(k * v);
    t.th1 += sgn * odd_coef_[n] * s;
    t.th1p += sgn * k * odd_coef_[n] * c;
    t.th2 += odd_coef_[n] * c;
    if (n >= 1) {
      const Complex c2 = std::cos(2.0 * n * v);
      t.th3 += 2.0 * even_coef_[n] * c2;
      t.th4 += 2.0 * sgn * even_coef_[n] * c2;
    }
  }
  t.th1 *= 2.0;
  t.th1p *= 2.0;
  t.th2 *= 2.0;
  return t;
}

double Weierstrass::pole_distance(Complex z) const {
  const Reduced r = reduce(z);
  double best = std::abs(r.z0);
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      best = std::min(best, std::abs(r.z0 - 2.0 * i * omega_ - 2.0 * j * omega_p_));
    }
  }
  return best;
}

void Weierstrass::check_pole(const Reduced& r, const char* what) const {
  if (pole_distance(r.z0) < 1e-6 * lattice_.w1) {
    std::ostringstream os;
    os << what << " evaluated within " << pole_distance(r.z0) << " of a lattice point";
    throw Error(ErrorCode::NearPole, os.str());
  }
}

Complex Weierstrass::wp(Complex z) const {
  const Reduced r = reduce(z);
  check_pole(r, "wp");
  const Complex a = kPi / (2.0 * omega_);
  const Thetas t = thetas(a * r.z0);
  const Complex ratio = a * th1p0_ * t.th2 / (th2_0_ * t.th1);
  return e_omega_ + ratio * ratio;
}

Complex Weierstrass::wp_prime(Complex z) const {
  const Reduced r = reduce(z);
  check_pole(r, "wp_prime");
  const Complex a = kPi / (2.0 * omega_);
  const Thetas t = thetas(a * r.z0);
  const Complex num = a * a * a * th1p0_ * th1p0_ * th1p0_ * t.th2 * t.th3 * t.th4;
  const Complex den = th2_0_ * th3_0_ * th4_0_ * t.th1 * t.th1 * t.th1;
  return -2.0 * num / den;
}

Complex Weierstrass::zeta(Complex z) const {
  const Reduced r = reduce(z);
  check_pole(r, "zeta");
  const Complex a = kPi / (2.0 * omega_);
  const Thetas t = thetas(a * r.z0);
  return eta_ * r.z0 / omega_ + a * t.th1p / t.th1 + 2.0 * static_cast<double>(r.m) * eta_ +
         2.0 * static_cast<double>(r.n) * eta_p_;
}

Complex Weierstrass::log_sigma(Complex z) const {
  const Reduced r = reduce(z);
  const Complex a = kPi / (2.0 * omega_);
  const Thetas t = thetas(a * r.z0);
  const double m = static_cast<double>(r.m), n = static_cast<double>(r.n);
  const Complex period = 2.0 * m * omega_ + 2.0 * n * omega_p_;
  const Complex eta_p = 2.0 * m * eta_ + 2.0 * n * eta_p_;
  const long parity = (r.m + r.n + r.m * r.n) & 1L;
  return std::log(1.0 / a) + eta_ * r.z0 * r.z0 / (2.0 * omega_) + std::log(t.th1 / th1p0_) +
         eta_p * (r.z0 + 0.5 * period) + (parity ? kI * kPi : Complex(0.0));
}

Complex Weierstrass::sigma(Complex z) const {
  const Reduced r = reduce(z);
  if (r.z0 == Complex(0.0)) return Complex(0.0);
  return std::exp(log_sigma(z));
}

Complex Weierstrass::quasi_period(Complex period) const {
  const Reduced r = reduce(period);
  return 2.0 * static_cast<double>(r.m) * eta_ + 2.0 * static_cast<double>(r.n) * eta_p_;
}

LatticeData half_periods(const Invariants& inv) { return Weierstrass(inv).lattice(); }

ComplexPoint wp(ComplexPoint z, const Invariants& inv) { return Weierstrass(inv).wp(z); }
ComplexPoint wp_prime(ComplexPoint z, const Invariants& inv) { return Weierstrass(inv).wp_prime(z); }
ComplexPoint zeta_w(ComplexPoint z, const Invariants& inv) { return Weierstrass(inv).zeta(z); }
ComplexPoint sigma_w(ComplexPoint z, const Invariants& inv) { return Weierstrass(inv).sigma(z); }

Invariants invariants_from_qQ(double q, double Q) {
  if (q > Q) throw Error(ErrorCode::InvalidParameter, "invariants_from_qQ requires q <= Q");
  return Invariants((q * q + Q * Q + q * Q) / 9.0, (q * q * Q + q * Q * Q) / 54.0);
}

Invariants invariants_from_Ptau(double P, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidParameter, "invariants_from_Ptau requires tau > 0");
  return Invariants((3.0 * P * P - 4.0 * tau * tau) / 36.0, -P * (P * P + 4.0 * tau * tau) / 216.0);
}

}  // namespace affine_elastica
