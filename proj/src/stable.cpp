#include "lamcoal/stable.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "lamcoal/errors.hpp"
#include "lamcoal/quadrature.hpp"

namespace lamcoal {

namespace {

double alpha_of(double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("stable: beta must lie in (0,1)");
  return 1.0 + beta;
}

void check_grid(std::span<const double> grid, bool from_zero) {
  if (grid.empty()) throw DomainError("stable: empty time grid");
  if (from_zero && grid[0] != 0.0) throw DomainError("stable: time grid must start at 0");
  if (!from_zero && !(grid[0] > 0.0)) throw DomainError("stable: time grid must start after 0");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("stable: time grid must be increasing");
}

}  // namespace

void validate(const StableParams& p) {
  if (!(p.alpha > 1.0 && p.alpha < 2.0)) throw DomainError("stable: alpha must lie in (1,2)");
  if (!(p.scale > 0.0) || !std::isfinite(p.scale)) throw DomainError("stable: scale must be positive");
  if (p.skew != 1 && p.skew != -1) throw DomainError("stable: skew must be +1 or -1");
}

double sample_skewed_stable(const StableParams& p, Rng& rng) {
  validate(p);
  const double a = p.alpha;
  const double tan_term = p.skew * std::tan(std::numbers::pi * a / 2.0);
  const double B = std::atan(tan_term) / a;
  const double S = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * a));
  const double V = std::numbers::pi * (rng.uniform_open() - 0.5);
  const double W = rng.exponential();
  const double x = S * std::sin(a * (V + B)) / std::pow(std::cos(V), 1.0 / a) *
                   std::pow(std::cos(V - a * (V + B)) / W, (1.0 - a) / a);
  return p.scale * x;
}

double weighted_interval_scale(double alpha, double a, double b) {
  return std::pow((std::pow(b, alpha + 1.0) - std::pow(a, alpha + 1.0)) / (alpha + 1.0),
                  1.0 / alpha);
}

StablePath simulate_levy_L(double beta, std::span<const double> grid, Rng& rng) {
  const double alpha = alpha_of(beta);
  check_grid(grid, true);
  StablePath path;
  path.times.assign(grid.begin(), grid.end());
  path.values.push_back(0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double dl = sample_skewed_stable(
        {alpha, std::pow(grid[i] - grid[i - 1], 1.0 / alpha), 1}, rng);
    path.increments.push_back(dl);
    path.values.push_back(path.values.back() + dl);
  }
  return path;
}

StablePath Z_direct_from_increments(double K, std::span<const double> grid,
                                    std::span<const double> increments) {
  check_grid(grid, true);
  if (increments.size() + 1 != grid.size())
    throw DomainError("Z direct: need one increment per grid interval");
  StablePath path;
  path.times.assign(grid.begin(), grid.end());
  path.increments.assign(increments.begin(), increments.end());
  path.values.push_back(0.0);
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    acc += increments[i - 1];
    path.values.push_back(-K * acc / grid[i]);
  }
  return path;
}

StablePath simulate_Z_direct(double beta, double K, std::span<const double> grid, Rng& rng) {
  const double alpha = alpha_of(beta);
  check_grid(grid, true);
  std::vector<double> inc;
  for (std::size_t i = 1; i < grid.size(); ++i)
    inc.push_back(sample_skewed_stable(
        {alpha, weighted_interval_scale(alpha, grid[i - 1], grid[i]), 1}, rng));
  return Z_direct_from_increments(K, grid, inc);
}

double sample_Z_marginal(double beta, double K, double t, Rng& rng) {
  const double alpha = alpha_of(beta);
  if (!(t > 0.0)) throw DomainError("Z marginal: t must be positive");
  return -K / t * sample_skewed_stable({alpha, weighted_interval_scale(alpha, 0.0, t), 1}, rng);
}

StablePath Z_sde_from_increments(double K, std::span<const double> grid, double z0,
                                 std::span<const double> increments) {
  check_grid(grid, false);
  if (increments.size() + 1 != grid.size())
    throw DomainError("Z sde: need one increment per grid interval");
  StablePath path;
  path.times.assign(grid.begin(), grid.end());
  path.increments.assign(increments.begin(), increments.end());
  path.values.push_back(z0);
  for (std::size_t i = 1; i < grid.size(); ++i)
    path.values.push_back(grid[i - 1] / grid[i] * path.values.back() -
                          K / grid[i] * increments[i - 1]);
  return path;
}

StablePath simulate_Z_sde(double beta, double K, std::span<const double> grid, Rng& rng) {
  const double alpha = alpha_of(beta);
  check_grid(grid, false);
  const double z0 = sample_Z_marginal(beta, K, grid[0], rng);
  std::vector<double> inc;
  for (std::size_t i = 1; i < grid.size(); ++i)
    inc.push_back(sample_skewed_stable(
        {alpha, weighted_interval_scale(alpha, grid[i - 1], grid[i]), 1}, rng));
  return Z_sde_from_increments(K, grid, z0, inc);
}

YEpsSimulator::YEpsSimulator(const LambdaSpec& spec, std::shared_ptr<const SpeedCurve> curve_v,
                             double eps, std::vector<double> t_grid, double delta,
                             const Tolerances& tol)
    : spec_(spec), curve_(std::move(curve_v)), eps_(eps), t_grid_(std::move(t_grid)),
      delta_(delta) {
  if (!(eps > 0.0)) throw DomainError("Y_eps: eps must be positive");
  check_grid(t_grid_, false);
  if (curve_->drift() != Drift::psi) throw DomainError("Y_eps: needs the speed curve of Ψ");
  if (eps * t_grid_.back() > curve_->t_upper())
    throw DomainError("Y_eps: speed curve does not cover eps * t");
  envelope_ = std::make_unique<JumpEnvelope>(spec_);
  if (!(delta >= envelope_->floor() && delta < envelope_->ceiling()))
    throw DomainError("Y_eps: delta outside the supported range");
  split_ = envelope_->split(delta);
  if (expected_jumps() > tol.max_expected_jumps) {
    std::ostringstream os;
    os << "Y_eps: delta = " << delta << " gives " << expected_jumps()
       << " expected jumps per path, above the limit " << tol.max_expected_jumps;
    throw CapacityError(os.str());
  }
  small_mass_ = lambda_mass(spec_, 0.0, delta, tol);
  const auto m1 = integrate_density(
      spec_, [](double y) { return 1.0 / y; }, delta, 1.0, 1e-12);
  quad::require_converged(m1, 1e-10, 0.0, "Y_eps first moment");
  first_moment_ = m1.value;

  double lo = 0.0;
  for (double t : t_grid_) {
    const double hi = eps_ * t;
    auto r1 = quad::gauss_kronrod([&](double s) { return phi(s); }, lo, hi, 1e-11);
    auto r2 = quad::gauss_kronrod(
        [&](double s) {
          const double f = phi(s);
          return f * f;
        },
        lo, hi, 1e-11);
    quad::require_converged(r1, 1e-9, 0.0, "Y_eps weight integral");
    quad::require_converged(r2, 1e-9, 0.0, "Y_eps weight integral");
    phi_int_.push_back(r1.value);
    phi2_int_.push_back(r2.value);
    lo = hi;
  }
}

double YEpsSimulator::phi(double s) const { return s > 0.0 ? 1.0 / curve_->h_of_v(s) : 0.0; }

double YEpsSimulator::weight(double t, double s) const {
  if (!(s > 0.0 && s <= eps_ * t)) throw DomainError("Y_eps weight: need 0 < s <= eps t");
  return phi(s) / phi(eps_ * t);
}

double YEpsSimulator::expected_jumps() const {
  return eps_ * t_grid_.back() * split_.high_mass;
}

double YEpsSimulator::gaussian_variance(std::size_t i) const {
  double acc = 0.0;
  for (std::size_t j = 0; j <= i; ++j) acc += phi2_int_[j];
  const double c = 1.0 / phi(eps_ * t_grid_[i]);
  return small_mass_ * acc * c * c;
}

StablePath YEpsSimulator::sample(Rng& rng) const {
  const double scale = std::pow(eps_, -1.0 / (1.0 + spec_.beta));
  boost::random::normal_distribution<double> normal;
  StablePath path;
  path.times = t_grid_;
  double jumps = 0.0, comp = 0.0, gauss = 0.0;
  double lo = 0.0;
  for (std::size_t j = 0; j < t_grid_.size(); ++j) {
    const double hi = eps_ * t_grid_[j];
    const double len = hi - lo;
    boost::random::poisson_distribution<std::int64_t, double> count(len * split_.high_mass);
    const std::int64_t n = count(rng);
    for (std::int64_t i = 0; i < n; ++i) {
      const double s = lo + rng.uniform() * len;
      const auto p = envelope_->propose_high(split_, rng);
      if (rng.uniform() >= p.accept) continue;
      jumps += phi(s) * p.y;
    }
    comp += first_moment_ * phi_int_[j];
    const double g = std::sqrt(small_mass_ * phi2_int_[j]) * normal(rng);
    path.increments.push_back(g);
    gauss += g;
    path.values.push_back(scale / phi(hi) * (jumps - comp + gauss));
    lo = hi;
  }
  return path;
}

StablePath simulate_Y_eps(const LambdaSpec& spec, const SpeedTable& table, double eps,
                          std::span<const double> t_grid, double delta, Rng& rng) {
  YEpsSimulator sim(spec, table.curve_v, eps, std::vector<double>(t_grid.begin(), t_grid.end()),
                    delta);
  return sim.sample(rng);
}

}  // namespace lamcoal
