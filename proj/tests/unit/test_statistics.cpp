#include <cmath>

#include "doctest.h"

#include "lamcoal/errors.hpp"
#include "lamcoal/random.hpp"
#include "lamcoal/statistics.hpp"

using namespace lamcoal;

TEST_CASE("two-sample KS statistic") {
  const std::vector<double> a{1, 2, 3}, b{4, 5, 6}, c{1, 1, 2}, d{1, 2, 2};
  CHECK(two_sample_ks(a, b) == 1.0);
  CHECK(two_sample_ks(a, a) == 0.0);
  CHECK(two_sample_ks(c, d) == doctest::Approx(1.0 / 3.0));
  CHECK(two_sample_ks(a, std::vector<double>{2.5}) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(two_sample_ks(a, std::vector<double>{}), DomainError);
}

TEST_CASE("KS null distribution") {
  // asymptotic 5% point 1.358 sqrt(2/n) for equal sizes
  const double crit = ks_critical(1000, 1000, 0.05);
  CHECK(crit == doctest::Approx(1.358 * std::sqrt(2.0 / 1000)).epsilon(0.02));
  CHECK(ks_pvalue(crit, 1000, 1000) == doctest::Approx(0.05).epsilon(1e-6));
  CHECK(ks_pvalue(0.0, 10, 10) == doctest::Approx(1.0));
  CHECK(ks_pvalue(1.0, 1000, 1000) < 1e-100);
  // empirical size under the null
  Rng rng(1, 0);
  int rejections = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(300), y(300);
    for (auto& v : x) v = rng.uniform();
    for (auto& v : y) v = rng.uniform();
    rejections += two_sample_ks(x, y) > ks_critical(300, 300, 0.05);
  }
  CHECK(static_cast<double>(rejections) / trials < 0.09);
}

TEST_CASE("summary and quantiles") {
  const std::vector<double> x{4, 1, 3, 2};
  const auto s = summarize(x);
  CHECK(s.n == 4);
  CHECK(s.mean == doctest::Approx(2.5));
  CHECK(s.sd == doctest::Approx(std::sqrt(5.0 / 3.0)));
  CHECK(s.min == 1.0);
  CHECK(s.max == 4.0);
  CHECK(quantile(x, 0.5) == doctest::Approx(2.5));
  CHECK(quantile(x, 0.25) == doctest::Approx(1.75));
  CHECK(quantile(x, 1.0) == 4.0);
  CHECK_THROWS_AS(quantile(x, 1.5), DomainError);
}

TEST_CASE("line fits") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 - 2.0 * v);
  const auto f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-2.0));
  CHECK(f.intercept == doctest::Approx(3.0));
  CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
  std::vector<double> p;
  for (double v : x) p.push_back(0.7 * std::pow(v, 1.5));
  CHECK(fit_loglog(x, p).slope == doctest::Approx(1.5));
  CHECK_THROWS_AS(fit_loglog(x, std::vector<double>{1, 2, -3, 4, 5}), DomainError);
}
