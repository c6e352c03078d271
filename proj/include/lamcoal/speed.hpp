#pragma once

#include <memory>
#include <vector>

#include <math.h>  // boost interpolators call unqualified isnan

#include <boost/math/interpolators/cubic_hermite.hpp>

#include "lamcoal/psi.hpp"

namespace lamcoal {

enum class Drift { psi, psi_star };

/// Solution of T(v) = ∫_v^∞ dq/D(q) = t for D = Ψ (origin 1) or D = Ψ*
/// (origin 0). T is tabulated at knots equally spaced in z = log(q - origin)
/// from a cutoff Q down to where T exceeds twice the requested t_max; beyond
/// Q the drift is replaced by its power law c_psi q^{1+β}, so for t below
/// T(Q) the solution is exactly K1 t^{-1/β}.
class SpeedCurve {
 public:
  SpeedCurve(std::shared_ptr<const PsiEvaluator> ev, Drift drift, double t_min, double t_max);

  Drift drift() const { return drift_; }
  double origin() const { return origin_; }
  double cutoff() const { return cutoff_; }
  /// Largest t the curve covers.
  double t_upper() const { return knot_t_.back(); }

  double drift_at(double q) const;
  /// ∫_q^∞ dr/D(r) for q > origin.
  double time_to_reach(double q) const;
  /// Exact inversion: interpolated start, safeguarded Newton in z.
  double v(double t) const;
  /// Cubic Hermite interpolation of the knots in log t (fast, no quadrature).
  double interpolate(double t) const;
  /// h(v_t) = D(v_t)/v_t, interpolated; 1/(β t) below the cutoff.
  double h_of_v(double t) const;

  const std::vector<double>& knot_t() const { return knot_t_; }
  const std::vector<double>& knot_q() const { return knot_q_; }

 private:
  double panel_integral(double z_lo, double z_hi) const;
  double tail_time(double q) const;

  std::shared_ptr<const PsiEvaluator> ev_;
  Drift drift_;
  double origin_;
  double beta_;
  double c_psi_;
  double K1_;
  double cutoff_;
  // Knots ordered by increasing t (decreasing z).
  std::vector<double> knot_z_, knot_t_, knot_q_, knot_drift_;
  using Hermite = boost::math::interpolators::cubic_hermite<std::vector<double>>;
  std::unique_ptr<Hermite> z_of_logt_;
  std::unique_ptr<Hermite> logh_of_logt_;
};

struct SpeedTable {
  LambdaSpec spec;
  AsymptoticConstants constants;
  double t_min = 0.0;
  double t_max = 0.0;
  std::vector<double> t, v, v_star, w;
  std::shared_ptr<const PsiEvaluator> psi;
  std::shared_ptr<const SpeedCurve> curve_v;
  std::shared_ptr<const SpeedCurve> curve_v_star;
};

/// n log-spaced grid points over [t_min, t_max], n >= 16.
SpeedTable build_speed_table(const LambdaSpec& spec, double t_min, double t_max, int n,
                             const Tolerances& tol = default_tolerances());

/// v_t from a built table. Below the table's cutoff time the power law
/// K1 t^{-1/β} is returned; above t_upper() a DomainError is raised.
double speed_v(const SpeedTable& table, double t);
double speed_v_star(const SpeedTable& table, double t);
/// One-off evaluation of v*_t without a prebuilt table.
double speed_v_star(const LambdaSpec& spec, double t);
/// w_t = K1 t^{-1/β}.
double speed_w(const LambdaSpec& spec, double t);
double speed_w(const AsymptoticConstants& c, double beta, double t);

}  // namespace lamcoal
