#include "lamcoal/speed.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lamcoal/errors.hpp"

namespace lamcoal {

namespace {

constexpr double kKnotStep = 0.25;  // spacing of knots in log(q - origin)
constexpr std::size_t kMaxKnots = 20000;

void check_t(double t, const char* what) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    std::ostringstream os;
    os << what << ": t = " << t << " must be positive";
    throw DomainError(os.str());
  }
}

}  // namespace

SpeedCurve::SpeedCurve(std::shared_ptr<const PsiEvaluator> ev, Drift drift, double t_min,
                       double t_max)
    : ev_(std::move(ev)), drift_(drift), origin_(drift == Drift::psi ? 1.0 : 0.0) {
  if (!(t_min > 0.0) || !(t_max > t_min))
    throw DomainError("speed curve needs 0 < t_min < t_max");
  const auto c = asymptotic_constants(ev_->spec(), ev_->tolerances());
  beta_ = ev_->spec().beta;
  c_psi_ = c.c_psi;
  K1_ = c.K1;
  const auto& tol = ev_->tolerances();
  cutoff_ = std::max(tol.speed_tail_min, tol.speed_tail_factor * K1_ * std::pow(t_min, -1.0 / beta_));

  double z = std::log(cutoff_ - origin_);
  double t = tail_time(cutoff_);
  knot_z_.push_back(z);
  knot_t_.push_back(t);
  knot_q_.push_back(cutoff_);
  knot_drift_.push_back(drift_at(cutoff_));
  while (t <= 2.0 * t_max) {
    if (knot_z_.size() >= kMaxKnots) throw NumericError("speed curve: too many knots");
    const double z_next = z - kKnotStep;
    t += panel_integral(z_next, z);
    z = z_next;
    const double q = origin_ + std::exp(z);
    knot_z_.push_back(z);
    knot_t_.push_back(t);
    knot_q_.push_back(q);
    knot_drift_.push_back(drift_at(q));
  }

  // Cubic Hermite in log t with exact slopes: dq/dt = -D(q).
  const std::size_t n = knot_t_.size();
  std::vector<double> lt(n), zz(n), dz(n), lh(n), dlh(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q = knot_q_[i], d = knot_drift_[i];
    const double dq = -d * knot_t_[i];  // dq/dlog t
    lt[i] = std::log(knot_t_[i]);
    zz[i] = knot_z_[i];
    dz[i] = dq / (q - origin_);
    lh[i] = std::log(d / q);
    if (drift_ == Drift::psi) dlh[i] = ev_->h_prime(q) / (d / q) * dq;
  }
  if (drift_ == Drift::psi_star)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = i == 0 ? 0 : i - 1, b = i + 1 == n ? i : i + 1;
      dlh[i] = (lh[b] - lh[a]) / (lt[b] - lt[a]);
    }
  auto lt2 = lt;
  z_of_logt_ = std::make_unique<Hermite>(std::move(lt), std::move(zz), std::move(dz));
  logh_of_logt_ = std::make_unique<Hermite>(std::move(lt2), std::move(lh), std::move(dlh));
}

double SpeedCurve::drift_at(double q) const {
  return drift_ == Drift::psi ? ev_->psi(q) : ev_->psi_star(q);
}

double SpeedCurve::tail_time(double q) const {
  return std::pow(q, -beta_) / (beta_ * c_psi_);
}

double SpeedCurve::panel_integral(double z_lo, double z_hi) const {
  const auto& tol = ev_->tolerances();
  const auto r = quad::gauss_kronrod<15>(
      [&](double s) {
        const double e = std::exp(s);
        return e / drift_at(origin_ + e);
      },
      z_lo, z_hi, tol.speed_panel_rel, 10);
  quad::require_converged(r, tol.speed_panel_rel, 0.0, "speed panel");
  return r.value;
}

double SpeedCurve::time_to_reach(double q) const {
  if (!(q > origin_)) throw DomainError("time_to_reach: q must exceed the drift origin");
  if (q >= cutoff_) return tail_time(q);
  const double z = std::log(q - origin_);
  if (z < knot_z_.back()) throw DomainError("time_to_reach: q below the tabulated range");
  // knot_z_ is decreasing; find the knot just above z.
  const auto it = std::lower_bound(knot_z_.begin(), knot_z_.end(), z, std::greater<double>());
  std::size_t i = static_cast<std::size_t>(it - knot_z_.begin());
  if (i < knot_z_.size() && knot_z_[i] == z) return knot_t_[i];
  --i;
  return knot_t_[i] + panel_integral(z, knot_z_[i]);
}

double SpeedCurve::interpolate(double t) const {
  check_t(t, "speed");
  if (t <= knot_t_.front()) return K1_ * std::pow(t, -1.0 / beta_);
  if (t > knot_t_.back()) {
    std::ostringstream os;
    os << "speed: t = " << t << " is beyond the tabulated range (" << knot_t_.back() << ")";
    throw DomainError(os.str());
  }
  return origin_ + std::exp((*z_of_logt_)(std::log(t)));
}

double SpeedCurve::v(double t) const {
  const double guess = interpolate(t);
  if (t <= knot_t_.front()) return guess;
  const auto it = std::lower_bound(knot_t_.begin(), knot_t_.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - knot_t_.begin());
  if (knot_t_[j] == t) return knot_q_[j];
  // Bracket: z in [knot_z_[j], knot_z_[j-1]]; T(knot_z_[j-1]) = knot_t_[j-1].
  const double z_knot = knot_z_[j - 1];
  const double t_knot = knot_t_[j - 1];
  double z_lo = knot_z_[j], z_hi = z_knot;
  double z = std::clamp(std::log(guess - origin_), z_lo, z_hi);
  const double rel = ev_->tolerances().speed_root_rel;
  for (int iter = 0; iter < 60; ++iter) {
    const double g = t_knot + panel_integral(z, z_knot) - t;  // decreasing in z
    if (g > 0.0) z_lo = z;
    if (g < 0.0) z_hi = z;
    const double q = origin_ + std::exp(z);
    const double slope = -(q - origin_) / drift_at(q);
    double z_new = z - g / slope;
    if (!(z_new >= z_lo && z_new <= z_hi)) z_new = 0.5 * (z_lo + z_hi);
    const double step = std::abs(z_new - z);
    z = z_new;
    const double q_new = origin_ + std::exp(z);
    if (g == 0.0 || step * (q_new - origin_) / q_new < 0.1 * rel) return q_new;
  }
  throw NumericError("speed: Newton inversion did not converge");
}

double SpeedCurve::h_of_v(double t) const {
  check_t(t, "h_of_v");
  if (t <= knot_t_.front()) return 1.0 / (beta_ * t);
  if (t > knot_t_.back()) throw DomainError("h_of_v: t beyond the tabulated range");
  return std::exp((*logh_of_logt_)(std::log(t)));
}

SpeedTable build_speed_table(const LambdaSpec& spec, double t_min, double t_max, int n,
                             const Tolerances& tol) {
  if (!(t_min > 0.0 && t_max > t_min)) throw DomainError("speed table needs 0 < t_min < t_max");
  if (n < 16) throw DomainError("speed table needs n >= 16");
  SpeedTable table;
  table.spec = spec;
  table.t_min = t_min;
  table.t_max = t_max;
  table.psi = std::make_shared<const PsiEvaluator>(spec, tol);
  table.constants = asymptotic_constants(spec, tol);
  table.curve_v = std::make_shared<const SpeedCurve>(table.psi, Drift::psi, t_min, t_max);
  table.curve_v_star = std::make_shared<const SpeedCurve>(table.psi, Drift::psi_star, t_min, t_max);
  const double lr = std::log(t_max / t_min);
  for (int i = 0; i < n; ++i) {
    const double t = i + 1 == n ? t_max : t_min * std::exp(lr * i / (n - 1));
    table.t.push_back(t);
    table.v.push_back(table.curve_v->v(t));
    table.v_star.push_back(table.curve_v_star->v(t));
    table.w.push_back(speed_w(table.constants, spec.beta, t));
  }
  for (int i = 1; i < n; ++i)
    if (!(table.v[i] < table.v[i - 1]))
      throw NumericError("speed table: v is not strictly decreasing");
  return table;
}

double speed_v(const SpeedTable& table, double t) {
  check_t(t, "speed_v");
  return table.curve_v->v(t);
}

double speed_v_star(const SpeedTable& table, double t) {
  check_t(t, "speed_v_star");
  return table.curve_v_star->v(t);
}

double speed_v_star(const LambdaSpec& spec, double t) {
  check_t(t, "speed_v_star");
  auto ev = std::make_shared<const PsiEvaluator>(spec);
  SpeedCurve curve(ev, Drift::psi_star, t / 2.0, t);
  return curve.v(t);
}

double speed_w(const AsymptoticConstants& c, double beta, double t) {
  check_t(t, "speed_w");
  return c.K1 * std::pow(t, -1.0 / beta);
}

double speed_w(const LambdaSpec& spec, double t) {
  return speed_w(asymptotic_constants(spec), spec.beta, t);
}

}  // namespace lamcoal
