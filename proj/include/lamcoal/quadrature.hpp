#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <sstream>
#include <string_view>

#include "lamcoal/errors.hpp"

namespace lamcoal::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;

  Result& operator+=(const Result& o) {
    value += o.value;
    error += o.error;
    l1 += o.l1;
    return *this;
  }
};

/// Adaptive Gauss–Kronrod (15/31) on a finite interval.
template <unsigned Points = 31, class F>
Result gauss_kronrod(F&& f, double a, double b, double rel_tol, unsigned max_depth = 18) {
  Result r;
  if (a == b) return r;
  // Mapped onto [0, 1] for the same reason as tanh_sinh below.
  const double w = b - a;
  r.value = boost::math::quadrature::gauss_kronrod<double, Points>::integrate(
      [&](double x) { return w * f(a + w * x); }, 0.0, 1.0, max_depth, rel_tol, &r.error, &r.l1);
  return r;
}

/// Double-exponential rule; tolerates integrable power singularities at
/// either endpoint. When a = 0 the abscissas near 0 are exact.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double rel_tol) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  Result r;
  if (a == b) return r;
  // Mapped onto [0, 1]: the error estimate is unreliable on very short
  // intervals.
  const double w = b - a;
  r.value = integrator.integrate([&](double x) { return w * f(a + w * x); }, 0.0, 1.0, rel_tol,
                                 &r.error, &r.l1);
  return r;
}

/// Throws NumericError when the achieved error estimate is far above the
/// requested tolerance.
inline void require_converged(const Result& r, double rel_tol, double abs_tol,
                              std::string_view what) {
  const double allowed = std::max(abs_tol, 100.0 * rel_tol * r.l1);
  if (!std::isfinite(r.value) || r.error > allowed) {
    std::ostringstream os;
    os << what << ": quadrature did not converge (value " << r.value << ", error estimate "
       << r.error << ", allowed " << allowed << ")";
    throw NumericError(os.str());
  }
}

}  // namespace lamcoal::quad
