#include "lamcoal/psi.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "lamcoal/errors.hpp"

namespace lamcoal {

namespace kernels {

// Below this value of q*y (or z) the integrands use truncated Taylor series.
constexpr double kSeriesSwitch = 1e-3;

double psi(double q, double y) {
  if (q * y < kSeriesSwitch) {
    // Σ_{j>=2} C(q,j)(-y)^j / y^2 with generalized binomial coefficients.
    const double c2 = q * (q - 1.0) / 2.0;
    const double c3 = c2 * (q - 2.0) / 3.0;
    const double c4 = c3 * (q - 3.0) / 4.0;
    const double c5 = c4 * (q - 4.0) / 5.0;
    return c2 - y * (c3 - y * (c4 - y * c5));
  }
  // (1-y)^q - 1 + qy = (1-y)((1-y)^{q-1} - 1) + (q-1)y
  const double f = (1.0 - y) * std::expm1((q - 1.0) * std::log1p(-y)) + (q - 1.0) * y;
  return f / (y * y);
}

double psi_star(double q, double y) {
  const double x = q * y;
  if (x < kSeriesSwitch) return q * q * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)));
  return (std::expm1(-x) + x) / (y * y);
}

double h_prime(double q, double y) {
  // d/dq [((1-y)^q - 1 + qy)/q] = (1 - e^{-z}(1+z))/q^2 with z = -q log(1-y).
  const double l = -std::log1p(-y);
  const double z = q * l;
  if (z < kSeriesSwitch) {
    const double r = l / y;
    return r * r * (0.5 - z * (1.0 / 3.0 - z * (1.0 / 8.0 - z / 30.0)));
  }
  const double num = z > 700.0 ? 1.0 : -std::expm1(-z) - z * std::exp(-z);
  return num / (q * q * y * y);
}

}  // namespace kernels

PsiEvaluator::PsiEvaluator(LambdaSpec spec, Tolerances tol)
    : spec_(std::move(spec)), tol_(tol) {}

double PsiEvaluator::integrate(double (*kernel)(double, double), double q, double hi,
                               const char* what) const {
  const double hints[] = {1.0 / std::max(q, 1.0)};
  const auto r = integrate_density(
      spec_, [&](double y) { return kernel(q, y); }, 0.0, hi, 0.1 * tol_.psi_rel, hints);
  quad::require_converged(r, tol_.psi_rel, tol_.psi_abs, what);
  return r.value;
}

namespace {
void check_q(double q, double lo, const char* what) {
  if (!(q >= lo) || !std::isfinite(q)) {
    std::ostringstream os;
    os << what << ": q = " << q << " is outside [" << lo << ", inf)";
    throw DomainError(os.str());
  }
}
}  // namespace

double PsiEvaluator::psi(double q) const {
  check_q(q, 1.0, "psi");
  if (q == 1.0) return 0.0;
  return integrate(&kernels::psi, q, 1.0, "psi");
}

double PsiEvaluator::psi_star(double q) const {
  check_q(q, 0.0, "psi_star");
  if (q == 0.0) return 0.0;
  return integrate(&kernels::psi_star, q, 1.0, "psi_star");
}

double PsiEvaluator::h(double q) const { return psi(q) / q; }

double PsiEvaluator::h_prime(double q) const {
  check_q(q, 1.0, "h_prime");
  return integrate(&kernels::h_prime, q, 1.0, "h_prime");
}

double PsiEvaluator::psi_truncated(double q, double a) const {
  check_q(q, 1.0, "psi_truncated");
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("psi_truncated: a must lie in (0,1]");
  if (q == 1.0) return 0.0;
  return integrate(&kernels::psi, q, a, "psi_truncated");
}

double PsiEvaluator::psi_star_truncated(double q, double a) const {
  check_q(q, 0.0, "psi_star_truncated");
  if (!(a > 0.0 && a <= 1.0)) throw DomainError("psi_star_truncated: a must lie in (0,1]");
  if (q == 0.0) return 0.0;
  return integrate(&kernels::psi_star, q, a, "psi_star_truncated");
}

double c_int_quadrature(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("c_int: beta must lie in (0,1)");
  constexpr double rel = 1e-13;
  // [0,1] with y = x^{1/(1-β)}; [1,∞) with y = x^{-1/β}.
  const double p = 1.0 / (1.0 - beta);
  auto low = quad::gauss_kronrod(
      [&](double x) {
        const double y = std::pow(x, p);
        return p * kernels::psi_star(1.0, y);
      },
      0.0, 1.0, rel);
  auto high = quad::gauss_kronrod(
      [&](double x) {
        if (x <= 0.0) return 1.0 / beta;
        const double y = std::pow(x, -1.0 / beta);
        return (std::expm1(-y) + y) / y / beta;
      },
      0.0, 1.0, rel);
  low += high;
  quad::require_converged(low, 1e-12, 0.0, "c_int");
  return low.value;
}

AsymptoticConstants asymptotic_constants(const LambdaSpec& spec, const Tolerances& tol) {
  const double beta = spec.beta;
  const double g1b = boost::math::tgamma(1.0 - beta);
  AsymptoticConstants c;
  c.c_int_closed = g1b / (beta * (1.0 + beta));
  c.c_int = c_int_quadrature(beta);
  if (std::abs(c.c_int - c.c_int_closed) > tol.c_int_consistency * c.c_int_closed) {
    std::ostringstream os;
    os.precision(17);
    os << "c_int: quadrature " << c.c_int << " disagrees with closed form " << c.c_int_closed;
    throw NumericError(os.str());
  }
  c.c_psi = spec.A * c.c_int_closed;
  c.K1 = std::pow((1.0 + beta) / (spec.A * g1b), 1.0 / beta);
  const double cosine = std::cos(std::numbers::pi * (1.0 + beta) / 2.0);
  c.K = std::pow(-spec.A * c.c_int * cosine, 1.0 / (1.0 + beta));
  return c;
}

}  // namespace lamcoal
