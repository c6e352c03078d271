#pragma once

#include <vector>

#include "lamcoal/measure.hpp"
#include "lamcoal/random.hpp"

namespace lamcoal {

/// Dominating measure for sampling from ν(dy) = g(y) y^{-2} dy by thinning.
///
/// On a geometric grid of cells, g(y) <= G(y) = c_i y^{-β} with c_i an upper
/// bound of y^β g(y) on the cell. For BetaFamily with a < 1 the last cell
/// [y_top, 1) uses G(y) = A y_top^{-β} (1-y)^{a-1} instead.
///
/// Two families of proposals are offered, split at a point s:
///  - low: density proportional to C(s) y^{-β} on (0, s], where C(s) bounds
///    y^β g(y) on (0, s];
///  - high: density proportional to G(y) y^{-2} on [s, 1).
/// Each proposal carries its thinning ratio (target over envelope).
class JumpEnvelope {
 public:
  struct Proposal {
    double y;
    double accept;
  };

  /// Quantities that depend only on the split point, precomputed once.
  struct Split {
    double s = 0.0;
    double low_bound = 0.0;
    double low_mass = 0.0;
    double high_mass = 0.0;
    std::size_t cell = 0;
    double s_p = 0.0;      // s^{-1-β}
    double partial = 0.0;  // high mass of [s, end of its cell]
  };

  explicit JumpEnvelope(const LambdaSpec& spec);

  const LambdaSpec& spec() const { return spec_; }
  /// Smallest admissible split point.
  double floor() const { return edges_[1]; }
  /// Largest admissible split point.
  double ceiling() const { return edges_.back(); }

  /// C(s).
  double low_bound(double s) const;
  /// ∫_0^s C(s) y^{-β} dy.
  double low_mass(double s) const;
  /// ∫_s^1 G(y) y^{-2} dy.
  double high_mass(double s) const;

  Split split(double s) const;
  Proposal propose_low(const Split& sp, Rng& rng) const;
  Proposal propose_high(const Split& sp, Rng& rng) const;
  Proposal propose_low(double s, Rng& rng) const { return propose_low(split(s), rng); }
  Proposal propose_high(double s, Rng& rng) const { return propose_high(split(s), rng); }

 private:
  std::size_t cell_of(double y) const;

  LambdaSpec spec_;
  double beta_;
  double log_ratio_;
  double low_exponent_;  // 1/(1-β)
  std::vector<double> edges_;      // edges_[0] = 0, ..., edges_.back() = y_top
  std::vector<double> bound_;      // c_i on (edges_[i], edges_[i+1]]
  std::vector<double> prefix_max_; // max_{j<=i} c_j
  std::vector<double> high_cell_;  // ∫ c_i y^{-2-β} over the full cell
  std::vector<double> high_suffix_;// Σ_{j>=i} high_cell_[j] + top mass
  bool beta_top_ = false;          // singular top cell in use
  double top_const_ = 0.0;         // A y_top^{-β - 2} for the singular top cell
  double top_mass_ = 0.0;
};

}  // namespace lamcoal
