#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "lamcoal/quadrature.hpp"
#include "lamcoal/tolerances.hpp"

namespace lamcoal {

/// Λ(dy) = y^{-β}(1-y)^{a-1} dy / B(1-β, a).
struct BetaFamily {
  double beta = 0.5;
  double a = 1.5;
};

/// Λ(dy) = y^{-β}(c0 + c1 y^α) dy on (0,1). Not normalized.
struct PerturbedPower {
  double beta = 0.5;
  double alpha = 0.2;
  double c0 = 1.0;
  double c1 = 1.0;
};

/// Density given on a grid of nodes in (0,1). Between nodes below y0 the
/// interpolation is linear in (log y, log g); above y0 it is linear in
/// (y, g). Below the first node y^β g is interpolated linearly from the
/// declared limit A; beyond the last node g is held constant.
struct TabulatedDensity {
  std::vector<double> y;
  std::vector<double> g;
  double beta = 0.5;
  double A = 1.0;
  double y0 = 1.0;
};

using LambdaKind = std::variant<BetaFamily, PerturbedPower, TabulatedDensity>;

/// A point mass declared in a measure description. Only used so that such
/// declarations can be rejected with a clear message.
struct Atom {
  double at = 0.0;
  double mass = 0.0;
};

struct LambdaSpec {
  LambdaKind kind;
  double beta = 0.5;
  double A = 1.0;
  double y0 = 1.0;
  double total_mass = 1.0;
  // Density behaves like (1-y)^{-upper_exponent} as y -> 1 (0 if bounded).
  double upper_exponent = 0.0;
  // log B(1-β, a) for BetaFamily, 0 otherwise.
  double log_norm = 0.0;

  std::string kind_name() const;
};

LambdaSpec make_lambda(const LambdaKind& kind, std::span<const Atom> atoms = {},
                       const Tolerances& tol = default_tolerances());
LambdaSpec make_beta(double beta, double a);
LambdaSpec make_perturbed_power(double beta, double alpha, double c0, double c1);

/// g(y) for y in (0,1); DomainError otherwise.
double lambda_density(const LambdaSpec& spec, double y);

namespace detail {
/// g(y) without argument checks.
double density(const LambdaSpec& spec, double y);
/// y^β g(y) without argument checks; finite at y = 0 (equals A there).
double scaled_density(const LambdaSpec& spec, double y);
}  // namespace detail

/// Upper bound of y^β g(y) over [lo, hi]. hi must be < 1 when the density
/// is singular at 1.
double scaled_density_bound(const LambdaSpec& spec, double lo, double hi);

/// ∫_lo^hi f(y) g(y) dy with the singularities of g at 0 (and at 1 when
/// present) removed by substitution. `hints` are extra breakpoints where f
/// changes scale (for example 1/q). f must be finite on (lo, hi).
quad::Result integrate_density(const LambdaSpec& spec, const std::function<double(double)>& f,
                               double lo, double hi, double rel_tol,
                               std::span<const double> hints = {});

/// Λ([lo, hi]).
double lambda_mass(const LambdaSpec& spec, double lo, double hi,
                   const Tolerances& tol = default_tolerances());

/// λ_{b,k} = ∫ y^{k-2}(1-y)^{b-k} Λ(dy). Closed form for BetaFamily.
double merge_rate(const LambdaSpec& spec, std::int64_t b, std::int64_t k,
                  const Tolerances& tol = default_tolerances());
/// Same quantity by adaptive quadrature for every kind.
double merge_rate_quadrature(const LambdaSpec& spec, std::int64_t b, std::int64_t k,
                             const Tolerances& tol = default_tolerances());

struct MergeKernel {
  std::int64_t b = 2;
  std::vector<double> rates;  // rates[k-2] = C(b,k) λ_{b,k}
  double total_rate = 0.0;
  std::vector<double> probabilities;

  double rate(std::int64_t k) const { return rates[static_cast<std::size_t>(k - 2)]; }
  /// Σ_k (k-1) q_k, the expected rate of block loss.
  double decrease_rate() const;
};

MergeKernel merge_kernel(const LambdaSpec& spec, std::int64_t b,
                         const Tolerances& tol = default_tolerances());

void to_json(nlohmann::json& j, const LambdaSpec& spec);
LambdaSpec lambda_from_json(const nlohmann::json& j);

}  // namespace lamcoal
