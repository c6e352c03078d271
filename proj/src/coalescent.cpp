#include "lamcoal/coalescent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/random/binomial_distribution.hpp>

#include "lamcoal/errors.hpp"

namespace lamcoal {

namespace {

constexpr std::int64_t kScanLimit = 64;  // inverse-CDF scan up to this b

std::int64_t binomial(std::int64_t b, double y, Rng& rng) {
  if (y >= 1.0) return b;
  boost::random::binomial_distribution<std::int64_t, double> dist(b, y);
  return dist(rng);
}

// P(Bin(b,y) >= 2) and its ratio to (by)^2/2. The series is used while
// by is small enough for the closed form to cancel.
struct MultipleMerge {
  double prob;
  double ratio;
  double log1m;  // log(1-y)
};

MultipleMerge multiple_merge(std::int64_t b, double y) {
  const double bd = static_cast<double>(b);
  const double by = bd * y;
  const double m = 0.5 * by * by;
  const double log1m = std::log1p(-y);
  if (by < 1e-2) {
    // Σ_{j>=2} (-1)^j (j-1) C(b,j) y^j
    double c = 0.5 * bd * (bd - 1.0) * y * y;
    double sum = c;
    for (std::int64_t j = 2; j < b; ++j) {
      c *= static_cast<double>(b - j) / static_cast<double>(j + 1) * y;
      const double term = static_cast<double>(j) * c;
      sum += (j % 2 == 0) ? -term : term;
      if (term < 1e-17 * sum) break;
    }
    return {sum, sum / m, log1m};
  }
  const double prob = -std::expm1((bd - 1.0) * log1m + std::log1p((bd - 1.0) * y));
  return {prob, prob / m, log1m};
}

// Bin(b, y) conditioned on being at least 2, by sequential inversion.
std::int64_t conditioned_binomial(std::int64_t b, double y, const MultipleMerge& mm, Rng& rng) {
  const double bd = static_cast<double>(b);
  double p = 0.5 * bd * (bd - 1.0) * y * y * std::exp((bd - 2.0) * mm.log1m);
  const double odds = y / (1.0 - y);
  double u = rng.uniform() * mm.prob;
  std::int64_t j = 2;
  while (u > p && j < b) {
    u -= p;
    p *= static_cast<double>(b - j) / static_cast<double>(j + 1) * odds;
    ++j;
    if (p <= 0.0) break;
  }
  return j;
}

}  // namespace

std::string to_string(Backend b) {
  switch (b) {
    case Backend::chain:
      return "chain";
    case Backend::poisson:
      return "poisson";
    default:
      return "thinned";
  }
}

Backend backend_from_string(const std::string& name) {
  if (name == "chain") return Backend::chain;
  if (name == "poisson" || name == "coloring") return Backend::poisson;
  if (name == "thinned") return Backend::thinned;
  throw DomainError("unknown backend '" + name + "' (expected chain, poisson or thinned)");
}

double multiple_merge_probability(std::int64_t b, double y) {
  if (b < 0 || !(y >= 0.0 && y <= 1.0)) throw DomainError("multiple_merge_probability: bad argument");
  if (b < 2 || y == 0.0) return 0.0;
  if (y == 1.0) return 1.0;
  return multiple_merge(b, y).prob;
}

std::int64_t evaluate_N(const CoalescentPath& path, double t) {
  if (!(t >= path.t_start && t <= path.t_end)) {
    std::ostringstream os;
    os << "evaluate_N: t = " << t << " outside [" << path.t_start << ", " << path.t_end << "]";
    throw DomainError(os.str());
  }
  const auto it = std::upper_bound(path.times.begin(), path.times.end(), t);
  return path.counts[static_cast<std::size_t>(it - path.times.begin()) - 1];
}

KernelSampler::KernelSampler(MergeKernel kernel) : kernel_(std::move(kernel)) {
  const auto& p = kernel_.probabilities;
  const std::size_t n = p.size();
  if (kernel_.b <= kScanLimit) {
    double acc = 0.0;
    for (double x : p) cdf_.push_back(acc += x);
    return;
  }
  // Vose's alias method.
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = p[i] * static_cast<double>(n);
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) prob_[i] = 1.0;
  for (auto i : small) prob_[i] = 1.0;
}

std::int64_t KernelSampler::sample(Rng& rng) const {
  if (!cdf_.empty()) {
    const double u = rng.uniform() * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    return static_cast<std::int64_t>(i) + 2;
  }
  const double x = rng.uniform() * static_cast<double>(prob_.size());
  auto i = static_cast<std::size_t>(x);
  if (i >= prob_.size()) i = prob_.size() - 1;
  const double frac = x - static_cast<double>(i);
  return static_cast<std::int64_t>(frac < prob_[i] ? i : alias_[i]) + 2;
}

std::int64_t sample_merge_size(const MergeKernel& kernel, Rng& rng) {
  return KernelSampler(kernel).sample(rng);
}

CoalescentSimulator::CoalescentSimulator(const LambdaSpec& spec, Backend backend,
                                         std::int64_t n0_max, double delta, bool truncate,
                                         const Tolerances& tol)
    : spec_(spec),
      backend_(backend),
      n0_max_(n0_max),
      delta_(delta),
      truncate_(truncate),
      tol_(tol),
      cache_flags_(static_cast<std::size_t>(
          backend == Backend::chain ? std::clamp<std::int64_t>(n0_max, 1, tol.kernel_cache_limit) + 1
                                    : 0)) {
  if (n0_max < 1) throw DomainError("simulator: n0 must be at least 1");
  if (backend_ == Backend::chain) {
    if (n0_max > tol_.n_max) {
      std::ostringstream os;
      os << "chain backend: n0 = " << n0_max << " exceeds N_max = " << tol_.n_max
         << "; use the thinned backend";
      throw CapacityError(os.str());
    }
    cache_.resize(cache_flags_.size());
    return;
  }
  envelope_ = std::make_unique<JumpEnvelope>(spec_);
  const double largest = std::sqrt(2.0) / envelope_->floor();
  if (static_cast<double>(n0_max) > largest) {
    std::ostringstream os;
    os << to_string(backend_) << " backend: n0 = " << n0_max << " exceeds " << largest;
    throw CapacityError(os.str());
  }
  if (backend_ == Backend::poisson && delta_ != 0.0) {
    if (!(delta_ >= envelope_->floor() && delta_ <= 0.5))
      throw DomainError("poisson backend: delta must lie in [1e-15, 0.5]");
    const double nd = static_cast<double>(n0_max) * delta_;
    if (0.5 * nd * nd > tol_.coloring_miss_prob) {
      std::ostringstream os;
      os << "poisson backend: delta = " << delta_ << " misses merges from " << n0_max
         << " blocks with probability up to " << 0.5 * nd * nd << " > "
         << tol_.coloring_miss_prob << "; use delta <= "
         << std::sqrt(2.0 * tol_.coloring_miss_prob) / static_cast<double>(n0_max);
      throw DomainError(os.str());
    }
  }
}

CoalescentSimulator::~CoalescentSimulator() = default;

const KernelSampler& CoalescentSimulator::sampler(std::int64_t b) const {
  const auto i = static_cast<std::size_t>(b);
  std::call_once(cache_flags_[i],
                 [&] { cache_[i] = std::make_unique<KernelSampler>(merge_kernel(spec_, b, tol_)); });
  return *cache_[i];
}

MergeEvent CoalescentSimulator::next_merge(std::int64_t b, Rng& rng) const {
  if (b < 2) throw DomainError("next_merge: need at least two blocks");
  if (b > n0_max_) throw DomainError("next_merge: b exceeds the simulator's n0_max");
  switch (backend_) {
    case Backend::chain:
      return next_chain(b, rng);
    default:
      return next_split(b, make_split(b), rng);
  }
}

MergeEvent CoalescentSimulator::next_chain(std::int64_t b, Rng& rng) const {
  if (static_cast<std::size_t>(b) < cache_.size()) {
    const auto& s = sampler(b);
    return {rng.exponential() / s.kernel().total_rate, s.sample(rng)};
  }
  const KernelSampler s(merge_kernel(spec_, b, tol_));
  return {rng.exponential() / s.kernel().total_rate, s.sample(rng)};
}

// The split point is held fixed while b decreases by up to 10%: for the
// thinned backend this only affects efficiency, and the coloring cutoff is
// taken at the largest b of the band so the miss bound still holds.
CoalescentSimulator::Split CoalescentSimulator::make_split(std::int64_t b) const {
  Split sp;
  const double bd = static_cast<double>(b);
  double s;
  if (backend_ == Backend::thinned) {
    s = std::numbers::sqrt2 / bd;
  } else {
    s = delta_ != 0.0 ? delta_ : std::sqrt(2.0 * tol_.coloring_miss_prob) / bd;
    sp.with_low = !truncate_;
  }
  sp.b_lo = backend_ == Backend::poisson && delta_ != 0.0
                ? 0
                : std::max<std::int64_t>(2, static_cast<std::int64_t>(bd / 1.1));
  sp.env = envelope_->split(s);
  return sp;
}

// Events of ν above s are drawn as they are and colored with Bin(b, y).
// Events below s are thinned: proposed from (b^2/2) y^2 ν(dy), which
// dominates P(Bin(b,y) >= 2) ν(dy) for every y, and kept with the ratio.
MergeEvent CoalescentSimulator::next_split(std::int64_t b, const Split& sp, Rng& rng) const {
  const double bd = static_cast<double>(b);
  const double low = sp.with_low ? 0.5 * bd * bd * sp.env.low_mass : 0.0;
  const double total = low + sp.env.high_mass;
  double wait = 0.0;
  for (;;) {
    wait += rng.exponential() / total;
    if (sp.with_low && rng.uniform() * total < low) {
      const auto p = envelope_->propose_low(sp.env, rng);
      const auto mm = multiple_merge(b, p.y);
      if (rng.uniform() >= p.accept * mm.ratio) continue;
      return {wait, conditioned_binomial(b, p.y, mm, rng)};
    }
    const auto p = envelope_->propose_high(sp.env, rng);
    if (rng.uniform() >= p.accept) continue;
    const std::int64_t k = binomial(b, p.y, rng);
    if (k >= 2) return {wait, k};
  }
}

std::int64_t CoalescentSimulator::run(std::int64_t n0, double t_start, double t_end, Rng& rng,
                                      const JumpObserver& on_merge) const {
  if (n0 < 1 || n0 > n0_max_) {
    std::ostringstream os;
    os << "run: n0 = " << n0 << " outside [1, " << n0_max_ << "]";
    throw DomainError(os.str());
  }
  if (!(t_end >= t_start)) throw DomainError("run: t_end must not precede t_start");
  std::int64_t b = n0;
  double t = t_start;
  Split sp;
  sp.b_lo = std::numeric_limits<std::int64_t>::max();
  while (b > 1) {
    MergeEvent ev;
    if (backend_ == Backend::chain) {
      ev = next_chain(b, rng);
    } else {
      if (b < sp.b_lo) sp = make_split(b);
      ev = next_split(b, sp, rng);
    }
    t += ev.wait;
    if (t > t_end) break;
    b -= ev.size - 1;
    if (on_merge) on_merge(t, b);
  }
  return b;
}

CoalescentPath CoalescentSimulator::path(std::int64_t n0, double t_start, double t_end,
                                         std::uint64_t seed, std::uint64_t stream) const {
  CoalescentPath p;
  p.n0 = n0;
  p.t_start = t_start;
  p.t_end = t_end;
  p.spec_id = spec_.kind_name();
  p.backend = backend_;
  p.seed = seed;
  p.stream = stream;
  p.times.push_back(t_start);
  p.counts.push_back(n0);
  Rng rng(seed, stream);
  run(n0, t_start, t_end, rng, [&](double t, std::int64_t b) {
    p.times.push_back(t);
    p.counts.push_back(b);
  });
  return p;
}

CoalescentPath simulate_block_chain(const LambdaSpec& spec, std::int64_t n0, double t_end,
                                    std::uint64_t seed, std::uint64_t stream) {
  return CoalescentSimulator(spec, Backend::chain, n0).path(n0, 0.0, t_end, seed, stream);
}

CoalescentPath simulate_poisson_coloring(const LambdaSpec& spec, std::int64_t n0, double t_end,
                                         double delta, std::uint64_t seed, std::uint64_t stream,
                                         bool truncate) {
  return CoalescentSimulator(spec, Backend::poisson, n0, delta, truncate).path(n0, 0.0, t_end, seed, stream);
}

CoalescentPath simulate_thinned(const LambdaSpec& spec, std::int64_t n0, double t_end,
                                std::uint64_t seed, std::uint64_t stream) {
  return CoalescentSimulator(spec, Backend::thinned, n0).path(n0, 0.0, t_end, seed, stream);
}

}  // namespace lamcoal
