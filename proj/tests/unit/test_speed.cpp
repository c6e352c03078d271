#include <cmath>

#include "doctest.h"

#include "lamcoal/errors.hpp"
#include "lamcoal/speed.hpp"

using namespace lamcoal;

namespace {
const SpeedTable& table() {
  static const SpeedTable t = build_speed_table(make_beta(0.5, 1.5), 1e-6, 10.0, 64);
  return t;
}
}  // namespace

// Roots of T(v) = t found independently with 30-digit quadrature.
TEST_CASE("speed against high-precision references") {
  const auto& tab = table();
  CHECK(speed_v(tab, 1e-3) == doctest::Approx(1768913.5).epsilon(1e-7));
  CHECK(speed_v(tab, 0.0297) == doctest::Approx(2063.349162).epsilon(1e-8));
  CHECK(speed_v(tab, 1.0) == doctest::Approx(4.051933732).epsilon(1e-8));
  CHECK(speed_v(tab, 10.0) == doctest::Approx(1.005763955).epsilon(1e-8));
  CHECK(speed_v_star(tab, 1.0) == doctest::Approx(3.688008387).epsilon(1e-8));
  CHECK(1e-6 * std::sqrt(speed_v(tab, 1e-6)) == doctest::Approx(1.32934105).epsilon(1e-7));
}

TEST_CASE("speed round trip and derivative") {
  const auto& tab = table();
  const PsiEvaluator& ev = *tab.psi;
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    const double t = tab.t[i];
    const double v = tab.v[i];
    CHECK(tab.curve_v->time_to_reach(v) == doctest::Approx(t).epsilon(1e-9));
    const double d = 1e-4 * t;
    const double fd = (speed_v(tab, t + d) - speed_v(tab, t - d)) / (2 * d);
    CHECK(fd == doctest::Approx(-ev.psi(v)).epsilon(1e-5));
  }
}

TEST_CASE("v and v* are close and w is the power law") {
  const auto& tab = table();
  for (std::size_t i = 0; i < tab.t.size(); ++i) {
    CHECK(tab.v[i] > tab.v_star[i]);
    CHECK(std::abs(std::log(tab.v[i] / tab.v_star[i])) <= tab.t[i]);
    CHECK(tab.w[i] == doctest::Approx(1.7671458676 * std::pow(tab.t[i], -2.0)).epsilon(1e-9));
  }
  CHECK(speed_v_star(make_beta(0.5, 1.5), 1.0) == doctest::Approx(3.688008387).epsilon(1e-8));
}

TEST_CASE("interpolation is close to the exact inversion") {
  const auto& c = *table().curve_v;
  for (double t : {2e-6, 3.3e-4, 0.05, 0.7, 4.0})
    CHECK(c.interpolate(t) == doctest::Approx(c.v(t)).epsilon(1e-6));
}

TEST_CASE("table range is enforced") {
  const auto& tab = table();
  CHECK_THROWS_AS(speed_v(tab, 1e3), DomainError);
  CHECK_THROWS_AS(build_speed_table(make_beta(0.5, 1.5), 1.0, 0.5, 64), DomainError);
  CHECK_THROWS_AS(build_speed_table(make_beta(0.5, 1.5), 1e-3, 1.0, 4), DomainError);
}
