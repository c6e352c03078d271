#include <cmath>

#include "doctest.h"

#include "lamcoal/coalescent.hpp"
#include "lamcoal/errors.hpp"
#include "lamcoal/psi.hpp"

using namespace lamcoal;

namespace {
const LambdaSpec& beta_spec() {
  static const LambdaSpec s = make_beta(0.5, 1.5);
  return s;
}
}  // namespace

TEST_CASE("backend names") {
  CHECK(backend_from_string("chain") == Backend::chain);
  CHECK(backend_from_string("poisson") == Backend::poisson);
  CHECK(backend_from_string("coloring") == Backend::poisson);
  CHECK(backend_from_string("thinned") == Backend::thinned);
  CHECK(to_string(Backend::poisson) == "poisson");
  CHECK_THROWS_AS(backend_from_string("other"), DomainError);
}

TEST_CASE("multiple merge probability") {
  // direct binomial sum over k >= 2, free of cancellation
  auto reference = [](std::int64_t b, double y) {
    long double sum = 0.0L;
    for (std::int64_t k = 2; k <= b; ++k)
      sum += std::exp(std::lgamma(b + 1.0L) - std::lgamma(k + 1.0L) - std::lgamma(b - k + 1.0L) +
                      k * std::log(static_cast<long double>(y)) +
                      (b - k) * std::log1p(-static_cast<long double>(y)));
    return static_cast<double>(sum);
  };
  for (std::int64_t b : {2, 3, 17, 1000})
    for (double y : {1e-9, 1e-4, 0.01, 0.3, 0.99})
      CHECK(multiple_merge_probability(b, y) == doctest::Approx(reference(b, y)).epsilon(1e-10));
}

TEST_CASE("kernel sampler frequencies") {
  for (std::int64_t b : {5, 200}) {
    const auto kernel = merge_kernel(beta_spec(), b);
    KernelSampler sampler(kernel);
    Rng rng(3, b);
    const int n = 200000;
    double mean = 0.0;
    int twos = 0;
    for (int i = 0; i < n; ++i) {
      const auto k = sampler.sample(rng);
      REQUIRE(k >= 2);
      REQUIRE(k <= b);
      mean += static_cast<double>(k - 1) / n;
      twos += k == 2;
    }
    CHECK(mean == doctest::Approx(kernel.decrease_rate() / kernel.total_rate).epsilon(0.01));
    CHECK(static_cast<double>(twos) / n == doctest::Approx(kernel.probabilities[0]).epsilon(0.01));
  }
}

TEST_CASE("every backend reproduces the exact merge rates") {
  for (auto backend : {Backend::chain, Backend::poisson, Backend::thinned}) {
    CAPTURE(to_string(backend));
    const CoalescentSimulator sim(beta_spec(), backend, 1000);
    for (std::int64_t b : {3, 60}) {
      const auto kernel = merge_kernel(beta_spec(), b);
      Rng rng(11, static_cast<std::uint64_t>(b) + 100 * static_cast<int>(backend));
      const int n = 40000;
      double wait = 0.0, loss = 0.0, triple = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto e = sim.next_merge(b, rng);
        wait += e.wait / n;
        loss += static_cast<double>(e.size - 1) / n;
        triple += (e.size == 3) / static_cast<double>(n);
      }
      CHECK(wait == doctest::Approx(1.0 / kernel.total_rate).epsilon(0.02));
      CHECK(loss == doctest::Approx(kernel.decrease_rate() / kernel.total_rate).epsilon(0.02));
      CHECK(triple == doctest::Approx(kernel.probabilities[1]).epsilon(0.05));
    }
  }
}

TEST_CASE("dropping coloring events below delta removes their share of the rate") {
  const std::int64_t b = 40;
  const double delta = 0.01;
  // the miss bound (bδ)²/2 = 0.08 is far above the default, so relax it
  Tolerances tol = default_tolerances();
  tol.coloring_miss_prob = 0.1;
  const CoalescentSimulator sim(beta_spec(), Backend::poisson, b, delta, true, tol);
  const auto kernel = merge_kernel(beta_spec(), b);
  const auto dropped = integrate_density(
      beta_spec(), [&](double y) {
        return y < 1e-100 ? b * (b - 1) / 2.0 : multiple_merge_probability(b, y) / (y * y);
      }, 0.0,
      delta, 1e-10);
  // close to C(b,2) Λ[0,δ] for small bδ
  CHECK(dropped.value < b * (b - 1) / 2.0 * lambda_mass(beta_spec(), 0.0, delta));
  CHECK(dropped.value > 0.05 * kernel.total_rate);
  Rng rng(5, 0);
  const int n = 40000;
  double wait = 0.0;
  for (int i = 0; i < n; ++i) wait += sim.next_merge(b, rng).wait / n;
  CHECK(1.0 / wait == doctest::Approx(kernel.total_rate - dropped.value).epsilon(0.02));
}

TEST_CASE("absorption from two blocks") {
  for (auto backend : {Backend::chain, Backend::thinned}) {
    const CoalescentSimulator sim(beta_spec(), backend, 2);
    double mean = 0.0;
    const int n = 10000;
    for (int r = 0; r < n; ++r) {
      Rng rng(9, static_cast<std::uint64_t>(r));
      double t = 0.0;
      sim.run(2, 0.0, 1e9, rng, [&](double s, std::int64_t) { t = s; });
      mean += t / n;
    }
    CHECK(mean == doctest::Approx(1.0).epsilon(0.03));
  }
}

TEST_CASE("paths are right-continuous, monotone and reproducible") {
  const CoalescentSimulator sim(beta_spec(), Backend::thinned, 500);
  const auto p = sim.path(500, 0.0, 0.5, 21, 4);
  const auto q = sim.path(500, 0.0, 0.5, 21, 4);
  CHECK(p.times == q.times);
  CHECK(p.counts == q.counts);
  REQUIRE(p.times.size() > 2);
  CHECK(p.counts.front() == 500);
  for (std::size_t i = 1; i < p.counts.size(); ++i) {
    CHECK(p.counts[i] < p.counts[i - 1]);
    CHECK(p.times[i] > p.times[i - 1]);
  }
  CHECK(evaluate_N(p, 0.0) == 500);
  CHECK(evaluate_N(p, p.times[1]) == p.counts[1]);
  CHECK(evaluate_N(p, std::nextafter(p.times[1], 0.0)) == 500);
  CHECK(evaluate_N(p, 0.5) == p.counts.back());
  CHECK_THROWS_AS(evaluate_N(p, 0.6), DomainError);
  CHECK_THROWS_AS(evaluate_N(p, -0.1), DomainError);
}

TEST_CASE("capacity and cutoff checks") {
  Tolerances tol = default_tolerances();
  CHECK_THROWS_AS(CoalescentSimulator(beta_spec(), Backend::chain, tol.n_max + 1), CapacityError);
  CHECK_THROWS_AS(CoalescentSimulator(beta_spec(), Backend::poisson, 1000, 0.1), DomainError);
  CHECK_THROWS_AS(CoalescentSimulator(beta_spec(), Backend::poisson, 1000, 0.9), DomainError);
  CHECK_NOTHROW(CoalescentSimulator(beta_spec(), Backend::poisson, 1000, 1e-5));
  CHECK_NOTHROW(CoalescentSimulator(beta_spec(), Backend::thinned, 10000000));
  const CoalescentSimulator sim(beta_spec(), Backend::thinned, 100);
  Rng rng(1, 0);
  CHECK_THROWS_AS(sim.run(101, 0.0, 1.0, rng), DomainError);
  CHECK_THROWS_AS(sim.next_merge(1, rng), DomainError);
}

TEST_CASE("perturbed power measure through the envelope sampler") {
  const auto spec = make_perturbed_power(0.5, 0.2, 1.0, 1.0);
  const CoalescentSimulator sim(spec, Backend::thinned, 1000);
  const auto kernel = merge_kernel(spec, 30);
  Rng rng(2, 0);
  const int n = 40000;
  double wait = 0.0;
  for (int i = 0; i < n; ++i) wait += sim.next_merge(30, rng).wait / n;
  CHECK(wait == doctest::Approx(1.0 / kernel.total_rate).epsilon(0.02));
}
