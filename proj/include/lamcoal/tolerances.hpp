#pragma once

#include <cstdint>

namespace lamcoal {

/// Every numerical tolerance used by the library lives here.
struct Tolerances {
  // Ψ, Ψ*, h, h' quadrature.
  double psi_abs = 1e-12;
  double psi_rel = 1e-9;
  // Below this value of q*y the integrands switch to their Taylor expansions.
  double taylor_switch = 1e-3;

  // Merge rates by quadrature; total mass validation.
  double merge_rate_rel = 1e-10;
  double mass_rel = 1e-10;

  // Consistency between the Gamma closed form and quadrature for c_int.
  double c_int_consistency = 1e-6;

  // Speed inversion.
  double speed_root_rel = 1e-9;
  double speed_panel_rel = 1e-12;
  double speed_tail_min = 1e12;      // smallest power-tail cutoff Q
  double speed_tail_factor = 1e6;    // Q >= factor * (largest tabulated v)

  // Coalescent simulation.
  std::int64_t n_max = 50000;
  double coloring_miss_prob = 1e-4;  // per-event miss bound for the coloring backend
  std::int64_t kernel_cache_limit = 2048;

  // Lévy-noise simulation.
  double max_expected_jumps = 1e7;
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

}  // namespace lamcoal
