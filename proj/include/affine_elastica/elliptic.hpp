#pragma once

#include <array>
#include <complex>

namespace affine_elastica {

using Complex = std::complex<double>;
/// A point of the complex plane; arguments and values of the elliptic kernel.
using ComplexPoint = Complex;

/// Weierstrass invariants (g2, g3) of the cubic 4t^3 - g2 t - g3 together
/// with the cached discriminant g2^3 - 27 g3^2.
class Invariants {
 public:
  Invariants() = default;
  Invariants(double g2, double g3) : g2_(g2), g3_(g3), delta_(g2 * g2 * g2 - 27.0 * g3 * g3) {}

  double g2() const noexcept { return g2_; }
  double g3() const noexcept { return g3_; }
  double discriminant() const noexcept { return delta_; }

  /// True when |Delta| is negligible with respect to the size of the invariants.
  bool degenerate(double rel_tol = 1e-12) const noexcept;

 private:
  double g2_ = 0.0;
  double g3_ = 0.0;
  double delta_ = 0.0;
};

/// Real and imaginary half-periods of a real lattice, the roots of the
/// Weierstrass cubic and eta1 = zeta(w1).
///
/// For Delta > 0 the roots are real and sorted e1 > e2 > e3. For Delta < 0
/// roots[1] is the real root and roots[0], roots[2] are the conjugate pair
/// with positive and negative imaginary part respectively.
struct LatticeData {
  double w1 = 0.0;
  double w2_im = 0.0;
  std::array<Complex, 3> roots{};
  double eta1 = 0.0;

  Complex w2() const noexcept { return {0.0, w2_im}; }
  /// The largest real root, equal to wp(w1).
  double real_root_at_w1() const noexcept;
};

/// Roots of 4t^3 - g2 t - g3 in the ordering used by LatticeData.
std::array<Complex, 3> cubic_roots(const Invariants& inv);

/// Real half-period of wp(.; g2, g3): half the smallest positive period of
/// the restriction to the real axis.
double real_half_period(const Invariants& inv);

/// Weierstrass elliptic functions for real invariants.
///
/// Evaluation goes through Jacobi theta series on a Gauss-reduced basis
/// (omega, omega') of the half-period lattice, so |nome| <= exp(-pi sqrt(3)/2)
/// and a handful of terms reach double precision. Arguments are first
/// reduced to the period parallelogram centred at the origin; zeta and sigma
/// pick up the quasi-periodicity factors exactly.
class Weierstrass {
 public:
  /// Throws Error(DegenerateDiscriminant) when Delta vanishes.
  explicit Weierstrass(const Invariants& inv);

  const Invariants& invariants() const noexcept { return inv_; }
  const LatticeData& lattice() const noexcept { return lattice_; }

  Complex wp(Complex z) const;
  Complex wp_prime(Complex z) const;
  Complex zeta(Complex z) const;
  Complex sigma(Complex z) const;
  /// A logarithm of sigma(z); sigma may overflow far from the origin while
  /// differences of log_sigma stay well conditioned.
  Complex log_sigma(Complex z) const;

  /// Quasi-period eta(P) with zeta(z + P) = zeta(z) + eta(P) for a lattice
  /// vector P (P is rounded to the nearest lattice vector).
  Complex quasi_period(Complex period) const;

  /// Distance from z to the nearest pole of wp.
  double pole_distance(Complex z) const;

  /// Reduced half-period basis, exposed for tests.
  Complex omega() const noexcept { return omega_; }
  Complex omega_prime() const noexcept { return omega_p_; }

 private:
  struct Reduced {
    Complex z0;
    long m = 0;
    long n = 0;
  };
  struct Thetas {
    Complex th1, th1p, th2, th3, th4;
  };

  Reduced reduce(Complex z) const;
  Thetas thetas(Complex v) const;
  void check_pole(const Reduced& r, const char* what) const;

  Invariants inv_;
  LatticeData lattice_;
  Complex omega_, omega_p_, tau_;
  Complex eta_, eta_p_;
  std::array<Complex, 12> odd_coef_{};   // q^{(n+1/2)^2}
  std::array<Complex, 12> even_coef_{};  // q^{n^2}
  int terms_ = 0;
  Complex th1p0_, th2_0_, th3_0_, th4_0_, e_omega_;
  double reduce_det_ = 0.0;
};

LatticeData half_periods(const Invariants& inv);
ComplexPoint wp(ComplexPoint z, const Invariants& inv);
ComplexPoint wp_prime(ComplexPoint z, const Invariants& inv);
ComplexPoint zeta_w(ComplexPoint z, const Invariants& inv);
ComplexPoint sigma_w(ComplexPoint z, const Invariants& inv);

/// Invariants of the critical curves whose curvature oscillates between the
/// equi-affine curvatures q < Q (the other root being -q-Q).
Invariants invariants_from_qQ(double q, double Q);
/// Invariants with one real curvature root P and complex roots -P/2 +- i tau.
Invariants invariants_from_Ptau(double P, double tau);

}  // namespace affine_elastica
