#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "lamcoal/jump_sampler.hpp"
#include "lamcoal/measure.hpp"
#include "lamcoal/random.hpp"
#include "lamcoal/speed.hpp"
#include "lamcoal/tolerances.hpp"

namespace lamcoal {

/// Stable law with characteristic function
///   exp{-σ^α |z|^α (1 - i skew sgn(z) tan(πα/2))},  α in (1,2), skew = ±1.
struct StableParams {
  double alpha = 1.5;
  double scale = 1.0;
  int skew = 1;
};

void validate(const StableParams& p);

/// One exact draw by the Chambers–Mallows–Stuck transform in Weron's form:
/// with V uniform on (-π/2, π/2), W standard exponential,
/// B = atan(skew tan(πα/2))/α and S = (1 + tan²(πα/2))^{1/(2α)},
///   X = S sin(α(V+B)) / cos(V)^{1/α} · (cos(V - α(V+B)) / W)^{(1-α)/α},
/// which has the characteristic function above with σ = 1.
double sample_skewed_stable(const StableParams& p, Rng& rng);

/// Scale of ∫_a^b u dL_u for a standard α-stable Lévy process L:
/// ((b^{α+1} - a^{α+1}) / (α+1))^{1/α}.
double weighted_interval_scale(double alpha, double a, double b);

/// Values of a process on a grid, plus the increment draws that produced it
/// (for L: increments of L; for Z: increments of ∫ u dL over grid intervals).
struct StablePath {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> increments;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// L on a grid starting at 0: independent increments, skew +1, scale Δt^{1/α}.
StablePath simulate_levy_L(double beta, std::span<const double> grid, Rng& rng);

/// Z(t) = -(K/t) ∫_0^t u dL_u on a grid starting at 0, with Z(0) = 0.
StablePath simulate_Z_direct(double beta, double K, std::span<const double> grid, Rng& rng);
/// Same, from given increments of ∫ u dL over the grid intervals.
StablePath Z_direct_from_increments(double K, std::span<const double> grid,
                                    std::span<const double> increments);

/// Integrating-factor recursion of dZ = -(Z/t) dt - K dL from grid[0] > 0,
/// with Z(grid[0]) drawn from its exact marginal:
///   Z(t_{i+1}) = (t_i/t_{i+1}) Z(t_i) - (K/t_{i+1}) ΔI_i.
StablePath simulate_Z_sde(double beta, double K, std::span<const double> grid, Rng& rng);
StablePath Z_sde_from_increments(double K, std::span<const double> grid, double z0,
                                 std::span<const double> increments);

/// Exact draw of Z(t): -(K/t) times a skew +1 stable variable of scale
/// weighted_interval_scale(α, 0, t).
double sample_Z_marginal(double beta, double K, double t, Rng& rng);

/// Y_ε(t) = ε^{-1/(1+β)} ∫_0^{εt} h(v_{εt})/h(v_s) dM(s), where M is the
/// compensated Poisson integral of y against ν(dy) ds. Jumps with y > δ are
/// simulated; the rest is replaced by a Gaussian of variance
/// Λ([0,δ]) ∫ w(s)² ds.
class YEpsSimulator {
 public:
  YEpsSimulator(const LambdaSpec& spec, std::shared_ptr<const SpeedCurve> curve_v, double eps,
                std::vector<double> t_grid, double delta = 1e-6,
                const Tolerances& tol = default_tolerances());

  const std::vector<double>& t_grid() const { return t_grid_; }
  double delta() const { return delta_; }
  /// Expected number of proposed jumps per path.
  double expected_jumps() const;
  /// Λ([0, δ]).
  double small_jump_mass() const { return small_mass_; }
  /// Variance of the Gaussian stand-in at grid time t_grid[i] (before the
  /// ε-scaling): Λ([0,δ]) ∫_0^{εt} w(s)² ds.
  double gaussian_variance(std::size_t i) const;
  /// w(s) = h(v_{εt})/h(v_s) for s <= εt.
  double weight(double t, double s) const;

  StablePath sample(Rng& rng) const;

 private:
  double phi(double s) const;  // 1/h(v_s)

  LambdaSpec spec_;
  std::shared_ptr<const SpeedCurve> curve_;
  double eps_;
  std::vector<double> t_grid_;
  double delta_;
  std::unique_ptr<JumpEnvelope> envelope_;
  JumpEnvelope::Split split_;
  double small_mass_ = 0.0;
  double first_moment_ = 0.0;           // ∫_δ^1 y ν(dy)
  std::vector<double> phi_int_, phi2_int_;  // ∫ φ and ∫ φ² over each grid piece
};

StablePath simulate_Y_eps(const LambdaSpec& spec, const SpeedTable& table, double eps,
                          std::span<const double> t_grid, double delta, Rng& rng);

}  // namespace lamcoal
