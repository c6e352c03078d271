#include <cmath>

#include "doctest.h"

#include "lamcoal/errors.hpp"
#include "lamcoal/harness.hpp"

using namespace lamcoal;

TEST_CASE("guard and minimal n0") {
  const auto spec = make_beta(0.5, 1.5);
  CHECK(minimal_n0(spec, 0.01) == 178487.0);
  ExperimentConfig c;
  try {
    check_guard(c);
    FAIL("default configuration should be refused");
  } catch (const GuardError& e) {
    CHECK(e.minimal_n0() == 70721183.0);
    CHECK(std::string(e.what()).find("70721183") != std::string::npos);
  }
  c.n0 = 70721183;
  CHECK_NOTHROW(check_guard(c));
}

TEST_CASE("experiment configuration JSON") {
  ExperimentConfig c;
  c.n0 = 12345;
  c.eps = 0.02;
  c.probe_times = {0.25, 1.0};
  c.speed = SpeedChoice::v_star;
  c.backend = Backend::chain;
  nlohmann::json j;
  to_json(j, c);
  const auto back = experiment_config_from_json(j);
  CHECK(back.n0 == 12345);
  CHECK(back.eps == 0.02);
  CHECK(back.probe_times == c.probe_times);
  CHECK(back.speed == SpeedChoice::v_star);
  CHECK(back.backend == Backend::chain);
  j["unknown"] = 1;
  CHECK_THROWS_AS(experiment_config_from_json(j), DomainError);
  CHECK_THROWS_AS(experiment_config_from_json({{"replicas", 10}}), DomainError);
  CHECK_THROWS_AS(experiment_config_from_json({{"n0", "many"}}), DomainError);
  CHECK_THROWS_AS(speed_choice_from_string("u"), DomainError);
}

TEST_CASE("small fluctuation experiment") {
  ExperimentConfig c;
  c.eps = 0.05;
  c.probe_times = {0.5, 1.0};
  c.n0 = static_cast<std::int64_t>(minimal_n0(c.spec, 0.025));
  c.replicas = 300;
  c.seed = 3;
  const auto rep = run_fluctuation_experiment(c);
  REQUIRE(rep.probes.size() == 2);
  CHECK(rep.K == doctest::Approx(1.0421235224).epsilon(1e-9));
  const double scale = std::pow(0.05, -1.0 / 1.5);
  for (const auto& p : rep.probes) {
    REQUIRE(p.n.size() == 300);
    CHECK(p.v > p.v_star);
    for (std::size_t r = 0; r < p.n.size(); ++r) {
      CHECK(p.x_v[r] == doctest::Approx(scale * (p.n[r] / p.v - 1.0)));
      // the running sup uses the interpolated speed, p.v the exact one
      CHECK(p.sup_dev2[r] >= std::pow(p.n[r] / p.v - 1.0, 2) * (1 - 1e-4));
    }
    CHECK(p.mean_ratio == doctest::Approx(1.0).epsilon(0.02));
    CHECK(p.ks_vs_z < 0.25);
  }
  // sup over a longer window can only grow
  for (std::size_t r = 0; r < 300; ++r)
    CHECK(rep.probes[1].sup_dev2[r] >= rep.probes[0].sup_dev2[r]);
  const auto again = run_fluctuation_experiment(c);
  CHECK(again.probes[1].n == rep.probes[1].n);
  CHECK(again.probes[1].z == rep.probes[1].z);
}

TEST_CASE("sup-deviation grows with t") {
  const auto spec = make_beta(0.5, 1.5);
  const auto table = sup_deviation_scaling(spec, 20000, {0.05, 0.1, 0.2}, 200, 1);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].mean < table.rows[1].mean);
  CHECK(table.rows[1].mean < table.rows[2].mean);
  CHECK(table.slope > 0.5);
  CHECK(table.slope < 1.5);
  CHECK_THROWS_AS(sup_deviation_scaling(spec, 200, {0.05, 0.1}, 200, 1), GuardError);
}

// Frozen output of the speed-ratio profile; its two-decade growth is about
// 3.41.
TEST_CASE("counterexample profile") {
  const std::vector<double> grid{1e-6, 1e-5, 1e-4, 1e-3, 1e-2};
  const auto r = counterexample_ratio(0.2, 0.5, grid);
  const std::vector<double> frozen{85.89, 46.69, 25.50, 14.03, 7.632};
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == doctest::Approx(frozen[i]).epsilon(2e-3));
  CHECK(r[2] / r[4] == doctest::Approx(3.41).epsilon(0.03));
  CHECK_THROWS_AS(counterexample_ratio(0.34, 0.5, grid), DomainError);
  const auto bounded = detail::counterexample_profile(0.34, 0.5, grid);
  for (double x : bounded) CHECK(std::abs(x) < 3.0);
}
