#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "lamcoal/jump_sampler.hpp"
#include "lamcoal/measure.hpp"
#include "lamcoal/random.hpp"
#include "lamcoal/tolerances.hpp"

namespace lamcoal {

/// How merge events of the block-counting process are generated.
///  - chain: jump chain with the exact merge kernel (alias tables), n0 <= N_max.
///  - poisson: Poisson coloring, events of ν on [δ, 1), each block joins with
///    probability y. Events below δ are either completed exactly by thinning
///    (default) or dropped; dropping them removes C(b,2) Λ([0,δ]) from the
///    merge rate, which is not small for the default δ.
///  - thinned: exact, Poisson events of ν over (0, 1) thinned so that only
///    events merging at least two blocks are generated.
enum class Backend { chain, poisson, thinned };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& name);

/// Piecewise-constant, right-continuous path of N. times[0] = t_start with
/// counts[0] = n0; counts[i] is the value just after times[i].
struct CoalescentPath {
  std::int64_t n0 = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  std::vector<double> times;
  std::vector<std::int64_t> counts;
  std::string spec_id;
  Backend backend = Backend::thinned;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// N(t) for t in [t_start, t_end]; DomainError otherwise.
std::int64_t evaluate_N(const CoalescentPath& path, double t);

/// Draws merge sizes k from a kernel: inverse-CDF scan for small b, Walker
/// alias table otherwise.
class KernelSampler {
 public:
  explicit KernelSampler(MergeKernel kernel);
  const MergeKernel& kernel() const { return kernel_; }
  std::int64_t sample(Rng& rng) const;

 private:
  MergeKernel kernel_;
  std::vector<double> cdf_;
  std::vector<double> prob_;
  std::vector<std::uint32_t> alias_;
};

std::int64_t sample_merge_size(const MergeKernel& kernel, Rng& rng);

struct MergeEvent {
  double wait = 0.0;      // time until the merge
  std::int64_t size = 0;  // number of blocks merged, >= 2
};

/// Called after every merge with the time and the new number of blocks.
using JumpObserver = std::function<void(double, std::int64_t)>;

/// Simulates the block-counting process of a Λ-coalescent. Immutable after
/// construction apart from internal caches, and safe to share across threads.
class CoalescentSimulator {
 public:
  /// n0_max bounds every later n0. delta is the fixed coloring cutoff
  /// (0 selects δ_b = sqrt(2 miss)/b per current block count) and truncate
  /// drops the events below it; both are ignored by the other backends.
  CoalescentSimulator(const LambdaSpec& spec, Backend backend, std::int64_t n0_max,
                      double delta = 0.0, bool truncate = false,
                      const Tolerances& tol = default_tolerances());
  ~CoalescentSimulator();

  Backend backend() const { return backend_; }
  const LambdaSpec& spec() const { return spec_; }
  std::int64_t n0_max() const { return n0_max_; }

  /// Waiting time to, and size of, the next merge from b >= 2 blocks.
  MergeEvent next_merge(std::int64_t b, Rng& rng) const;

  /// Runs from N(t_start) = n0 until t_end (or a single block). Returns N(t_end).
  std::int64_t run(std::int64_t n0, double t_start, double t_end, Rng& rng,
                   const JumpObserver& on_merge = {}) const;

  CoalescentPath path(std::int64_t n0, double t_start, double t_end, std::uint64_t seed,
                      std::uint64_t stream) const;

 private:
  const KernelSampler& sampler(std::int64_t b) const;
  MergeEvent next_chain(std::int64_t b, Rng& rng) const;
  // Split point in use for block counts in [b_lo, b_hi].
  struct Split {
    JumpEnvelope::Split env;
    std::int64_t b_lo = 0;
    bool with_low = true;
  };
  Split make_split(std::int64_t b) const;
  MergeEvent next_split(std::int64_t b, const Split& sp, Rng& rng) const;

  LambdaSpec spec_;
  Backend backend_;
  std::int64_t n0_max_;
  double delta_;
  bool truncate_;
  Tolerances tol_;
  std::unique_ptr<JumpEnvelope> envelope_;
  mutable std::vector<std::once_flag> cache_flags_;
  mutable std::vector<std::unique_ptr<KernelSampler>> cache_;
};

/// Convenience wrappers that build a one-off simulator.
CoalescentPath simulate_block_chain(const LambdaSpec& spec, std::int64_t n0, double t_end,
                                    std::uint64_t seed, std::uint64_t stream = 0);
CoalescentPath simulate_poisson_coloring(const LambdaSpec& spec, std::int64_t n0, double t_end,
                                         double delta, std::uint64_t seed,
                                         std::uint64_t stream = 0, bool truncate = false);
CoalescentPath simulate_thinned(const LambdaSpec& spec, std::int64_t n0, double t_end,
                                std::uint64_t seed, std::uint64_t stream = 0);

/// P(Bin(b, y) >= 2).
double multiple_merge_probability(std::int64_t b, double y);

}  // namespace lamcoal
