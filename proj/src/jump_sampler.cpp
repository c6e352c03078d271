#include "lamcoal/jump_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "lamcoal/errors.hpp"

namespace lamcoal {

namespace {

constexpr double kFloor = 1e-15;
constexpr double kCellRatio = 1.189207115002721;  // 2^{1/4}
constexpr double kSingularTop = 0.75;

void check_split(double s, double lo, double hi) {
  if (!(s >= lo && s < hi)) {
    std::ostringstream os;
    os << "jump envelope: split point " << s << " outside [" << lo << ", " << hi << ")";
    throw DomainError(os.str());
  }
}

}  // namespace

JumpEnvelope::JumpEnvelope(const LambdaSpec& spec) : spec_(spec), beta_(spec.beta) {
  log_ratio_ = std::log(kCellRatio);
  low_exponent_ = 1.0 / (1.0 - beta_);
  beta_top_ = spec.kind.index() == 0 && std::get<BetaFamily>(spec.kind).a < 1.0;
  const double top = beta_top_ ? kSingularTop : 1.0;

  edges_.push_back(0.0);
  for (double e = kFloor; e < top; e *= kCellRatio) edges_.push_back(e);
  edges_.push_back(top);

  const std::size_t cells = edges_.size() - 1;
  const double p = 1.0 + beta_;
  for (std::size_t i = 0; i < cells; ++i) {
    const double c = scaled_density_bound(spec_, edges_[i], edges_[i + 1]);
    if (!std::isfinite(c)) throw NumericError("jump envelope: unbounded density cell");
    bound_.push_back(c);
    prefix_max_.push_back(i == 0 ? c : std::max(prefix_max_.back(), c));
    const double lo = edges_[i];
    high_cell_.push_back(lo > 0.0 ? c * (std::pow(lo, -p) - std::pow(edges_[i + 1], -p)) / p
                                  : 0.0);
  }
  if (beta_top_) {
    const double a = std::get<BetaFamily>(spec.kind).a;
    top_const_ = spec_.A * std::pow(top, -beta_ - 2.0);
    top_mass_ = top_const_ * std::pow(1.0 - top, a) / a;
  }
  high_suffix_.assign(cells + 1, 0.0);
  high_suffix_[cells] = top_mass_;
  for (std::size_t i = cells; i-- > 0;) high_suffix_[i] = high_suffix_[i + 1] + high_cell_[i];
}

std::size_t JumpEnvelope::cell_of(double y) const {
  const std::size_t cells = edges_.size() - 1;
  if (y <= edges_[1]) return 0;
  const double raw = 1.0 + std::floor(std::log(y / edges_[1]) / log_ratio_);
  std::size_t i = static_cast<std::size_t>(std::min(raw, static_cast<double>(cells - 1)));
  while (i > 0 && y <= edges_[i]) --i;
  while (i + 1 < cells && y > edges_[i + 1]) ++i;
  return i;
}

double JumpEnvelope::low_bound(double s) const {
  check_split(s, 0.0, ceiling());
  return prefix_max_[cell_of(s)];
}

double JumpEnvelope::low_mass(double s) const {
  return low_bound(s) * std::pow(s, 1.0 - beta_) / (1.0 - beta_);
}

double JumpEnvelope::high_mass(double s) const {
  check_split(s, floor(), ceiling());
  const std::size_t k = cell_of(s);
  const double p = 1.0 + beta_;
  const double partial = bound_[k] * (std::pow(s, -p) - std::pow(edges_[k + 1], -p)) / p;
  return partial + high_suffix_[k + 1];
}

JumpEnvelope::Split JumpEnvelope::split(double s) const {
  check_split(s, floor(), ceiling());
  Split sp;
  sp.s = s;
  sp.cell = cell_of(s);
  sp.low_bound = prefix_max_[sp.cell];
  sp.low_mass = sp.low_bound * std::pow(s, 1.0 - beta_) / (1.0 - beta_);
  const double p = 1.0 + beta_;
  sp.s_p = std::pow(s, -p);
  sp.partial = bound_[sp.cell] * (sp.s_p - std::pow(edges_[sp.cell + 1], -p)) / p;
  sp.high_mass = sp.partial + high_suffix_[sp.cell + 1];
  return sp;
}

JumpEnvelope::Proposal JumpEnvelope::propose_low(const Split& sp, Rng& rng) const {
  const double u = rng.uniform_open();
  const double y = sp.s * (low_exponent_ == 2.0 ? u * u : std::pow(u, low_exponent_));
  return {y, detail::scaled_density(spec_, y) / sp.low_bound};
}

JumpEnvelope::Proposal JumpEnvelope::propose_high(const Split& sp, Rng& rng) const {
  const std::size_t cells = edges_.size() - 1;
  const std::size_t k = sp.cell;
  const double p = 1.0 + beta_;
  const double partial = sp.partial;
  const double u = rng.uniform() * sp.high_mass;

  auto in_cell = [&](double lo_p, double hi, double c) -> Proposal {
    const double hi_p = std::pow(hi, -p);
    const double y = std::pow(lo_p - rng.uniform() * (lo_p - hi_p), -1.0 / p);
    return {y, std::min(1.0, detail::scaled_density(spec_, y) / c)};
  };

  if (u < partial) return in_cell(sp.s_p, edges_[k + 1], bound_[k]);

  // Cells above k: high_suffix_ is decreasing; find j with
  // high_suffix_[j+1] < target <= high_suffix_[j].
  const double target = high_suffix_[k + 1] - (u - partial);
  const auto first = high_suffix_.begin() + static_cast<std::ptrdiff_t>(k + 1);
  auto it = std::upper_bound(first, high_suffix_.end(), target, std::greater<double>());
  std::size_t j = static_cast<std::size_t>(it - high_suffix_.begin());
  j = std::max(j, k + 2) - 1;
  if (!beta_top_) j = std::min(j, cells - 1);
  if (j < cells) return in_cell(std::pow(edges_[j], -p), edges_[j + 1], bound_[j]);

  // Singular top cell, proposal density ∝ (1-y)^{a-1} on [top, 1).
  const double a = std::get<BetaFamily>(spec_.kind).a;
  const double top = edges_.back();
  const double w = (1.0 - top) * std::pow(rng.uniform_open(), 1.0 / a);
  const double y = 1.0 - w;
  return {y, std::pow(top / y, beta_ + 2.0)};
}

}  // namespace lamcoal
