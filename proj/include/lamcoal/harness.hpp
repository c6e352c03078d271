#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "lamcoal/coalescent.hpp"
#include "lamcoal/measure.hpp"
#include "lamcoal/speed.hpp"

namespace lamcoal {

/// Which deterministic speed normalizes N in X_ε.
enum class SpeedChoice { v, v_star, w };

std::string to_string(SpeedChoice s);
SpeedChoice speed_choice_from_string(const std::string& name);

struct ExperimentConfig {
  LambdaSpec spec = make_beta(0.5, 1.5);
  std::int64_t n0 = 20000;
  double eps = 1e-3;
  std::vector<double> probe_times{0.5, 1.0};
  std::int64_t replicas = 1000;
  Backend backend = Backend::thinned;
  SpeedChoice speed = SpeedChoice::v;
  std::uint64_t seed = 1;
  std::string output_path;
  unsigned workers = 0;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

/// 10 v_{t}: the smallest n0 for which the validity guard v_t <= n0/10 holds.
double minimal_n0(const LambdaSpec& spec, double t);
/// Throws GuardError unless v_{eps t} <= n0/10 at the earliest probe time
/// (so that every probe lies inside the validity window).
void check_guard(const ExperimentConfig& c);

struct ProbeResult {
  double t = 0.0;
  double v = 0.0, v_star = 0.0, w = 0.0;  // speeds at εt
  std::vector<std::int64_t> n;            // N(εt) per replica
  std::vector<double> x_v, x_v_star, x_w; // X_ε(t) under each speed
  std::vector<double> z;                  // independent Z(t) draws
  std::vector<double> sup_dev2;           // sup_{s <= εt} |N_s/v_s - 1|^2 per replica
  double ks_vs_z = 0.0;                   // selected speed against Z
  double ks_threshold = 0.1;
  double ks_v_vs_v_star = 0.0;            // same N samples, two speeds
  double mean_ratio = 0.0;                // mean of N/v
  double mean_x = 0.0, sd_x = 0.0;        // selected speed
  double mean_sup_dev2 = 0.0;
};

struct FluctuationReport {
  ExperimentConfig config;
  double entrance_time = 0.0;  // T(n0): the simulation starts at N(T(n0)) = n0
  double K = 0.0;
  std::vector<ProbeResult> probes;
  std::string version;

  /// Report without per-sample arrays.
  nlohmann::json summary_json() const;
};

FluctuationReport run_fluctuation_experiment(const ExperimentConfig& c);

struct SupScalingRow {
  double t = 0.0;
  double mean = 0.0;  // E sup_{s <= t} |N_s/v_s - 1|^2
  double se = 0.0;    // Monte Carlo standard error
};

struct SupScalingTable {
  std::vector<SupScalingRow> rows;
  double slope = 0.0;  // log-log least-squares slope of mean against t
  double slope_se = 0.0;
  double entrance_time = 0.0;
};

/// Monte Carlo E sup_{s<=t}|N_s/v_s - 1|^2 for each t, from N(T(n0)) = n0.
/// The guard v_t <= n0/10 is enforced at the smallest t.
SupScalingTable sup_deviation_scaling(const LambdaSpec& spec, std::int64_t n0,
                                      std::vector<double> t_list, std::int64_t replicas,
                                      std::uint64_t seed, Backend backend = Backend::thinned,
                                      unsigned workers = 0);

/// r(t) = t^{-1/(1+β)} (w_t/v_t - 1) for g(y) = y^{-β}(1 + y^α); requires
/// 0 < α < β/(1+β).
std::vector<double> counterexample_ratio(double alpha, double beta, std::vector<double> t_grid);

namespace detail {
/// r(t) without the range check on α.
std::vector<double> counterexample_profile(double alpha, double beta,
                                           const std::vector<double>& t_grid);
}  // namespace detail

}  // namespace lamcoal
