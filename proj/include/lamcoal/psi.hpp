#pragma once

#include "lamcoal/measure.hpp"
#include "lamcoal/tolerances.hpp"

namespace lamcoal {

/// Evaluates Ψ, Ψ*, h = Ψ/q and h' for a measure by adaptive quadrature.
/// Immutable after construction and safe to share between threads.
class PsiEvaluator {
 public:
  explicit PsiEvaluator(LambdaSpec spec, Tolerances tol = default_tolerances());

  const LambdaSpec& spec() const { return spec_; }
  const Tolerances& tolerances() const { return tol_; }

  /// ∫((1-y)^q - 1 + qy) y^{-2} Λ(dy), q >= 1.
  double psi(double q) const;
  /// ∫(e^{-qy} - 1 + qy) y^{-2} Λ(dy), q >= 0.
  double psi_star(double q) const;
  /// Ψ(q)/q, q >= 1.
  double h(double q) const;
  /// d/dq Ψ(q)/q, q >= 1.
  double h_prime(double q) const;

  /// Ψ and Ψ* with Λ restricted to [0, a]; exposed for tests of the
  /// truncation bounds.
  double psi_truncated(double q, double a) const;
  double psi_star_truncated(double q, double a) const;

 private:
  double integrate(double (*kernel)(double, double), double q, double hi, const char* what) const;

  LambdaSpec spec_;
  Tolerances tol_;
};

/// Integrands divided by y^2 (Λ(dy) excluded); finite as y -> 0.
namespace kernels {
double psi(double q, double y);
double psi_star(double q, double y);
double h_prime(double q, double y);
}  // namespace kernels

struct AsymptoticConstants {
  double c_psi = 0.0;  // Ψ(q) ~ c_psi q^{1+β}
  double K1 = 0.0;     // v_t ~ K1 t^{-1/β}
  double K = 0.0;      // scale of the stable limit
  double c_int = 0.0;  // ∫_0^∞ (e^{-y} - 1 + y) y^{-2-β} dy, by quadrature
  double c_int_closed = 0.0;
};

/// Throws NumericError when the two c_int routes disagree beyond tolerance.
AsymptoticConstants asymptotic_constants(const LambdaSpec& spec,
                                         const Tolerances& tol = default_tolerances());

/// ∫_0^∞ (e^{-y} - 1 + y) y^{-2-β} dy by quadrature.
double c_int_quadrature(double beta);

}  // namespace lamcoal
