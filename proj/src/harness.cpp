#include "lamcoal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lamcoal/errors.hpp"
#include "lamcoal/parallel.hpp"
#include "lamcoal/stable.hpp"
#include "lamcoal/statistics.hpp"

namespace lamcoal {

namespace {

void check_times(const std::vector<double>& t, const char* what) {
  if (t.empty()) throw DomainError(std::string(what) + ": no times given");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(t[i] > 0.0) || !std::isfinite(t[i]))
      throw DomainError(std::string(what) + ": times must be positive");
    if (i > 0 && !(t[i] > t[i - 1]))
      throw DomainError(std::string(what) + ": times must be strictly increasing");
  }
}

void validate(const ExperimentConfig& c) {
  if (c.n0 < 2) throw DomainError("experiment: n0 must be at least 2");
  if (!(c.eps > 0.0) || !std::isfinite(c.eps)) throw DomainError("experiment: eps must be positive");
  check_times(c.probe_times, "experiment probe times");
  if (c.replicas < 100) throw DomainError("experiment: replicas must be at least 100");
}

[[noreturn]] void guard_failure(const char* what, double v, std::int64_t n0, double t) {
  const double need = std::ceil(10.0 * v);
  std::ostringstream os;
  os.precision(10);
  os << what << ": v_t = " << v << " at t = " << t << " exceeds n0/10 = "
     << static_cast<double>(n0) / 10.0 << "; minimal n0 is " << need;
  throw GuardError(os.str(), need);
}

// Tracks sup |N_s/v_s - 1| along a path. Between merges N is constant and
// v decreases, so N/v is monotone and the supremum is attained at merge
// times (just before or after) or at the evaluation time.
struct SupTracker {
  const SpeedCurve* curve;
  double running = 0.0;
  void at(double t, std::int64_t before, std::int64_t after) {
    const double v = curve->interpolate(t);
    running = std::max({running, std::abs(static_cast<double>(before) / v - 1.0),
                        std::abs(static_cast<double>(after) / v - 1.0)});
  }
};

}  // namespace

std::string to_string(SpeedChoice s) {
  switch (s) {
    case SpeedChoice::v:
      return "v";
    case SpeedChoice::v_star:
      return "v_star";
    default:
      return "w";
  }
}

SpeedChoice speed_choice_from_string(const std::string& name) {
  if (name == "v") return SpeedChoice::v;
  if (name == "v_star" || name == "v*") return SpeedChoice::v_star;
  if (name == "w") return SpeedChoice::w;
  throw DomainError("unknown speed '" + name + "' (expected v, v_star or w)");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json spec;
  to_json(spec, c.spec);
  j = {{"spec", spec},
       {"n0", c.n0},
       {"eps", c.eps},
       {"probe_times", c.probe_times},
       {"replicas", c.replicas},
       {"backend", to_string(c.backend)},
       {"speed", to_string(c.speed)},
       {"seed", c.seed},
       {"output_path", c.output_path},
       {"workers", c.workers}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("experiment config must be a JSON object");
  static const std::vector<std::string> keys{"spec",   "n0",   "eps",         "probe_times",
                                             "replicas", "backend", "speed", "seed",
                                             "output_path", "workers"};
  for (const auto& [key, _] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw DomainError("unknown experiment config field \"" + key + "\"");
  ExperimentConfig c;
  try {
    if (j.contains("spec")) c.spec = lambda_from_json(j.at("spec"));
    if (j.contains("n0")) c.n0 = j.at("n0").get<std::int64_t>();
    if (j.contains("eps")) c.eps = j.at("eps").get<double>();
    if (j.contains("probe_times")) c.probe_times = j.at("probe_times").get<std::vector<double>>();
    if (j.contains("replicas")) c.replicas = j.at("replicas").get<std::int64_t>();
    if (j.contains("backend")) c.backend = backend_from_string(j.at("backend").get<std::string>());
    if (j.contains("speed")) c.speed = speed_choice_from_string(j.at("speed").get<std::string>());
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_path")) c.output_path = j.at("output_path").get<std::string>();
    if (j.contains("workers")) c.workers = j.at("workers").get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed experiment config: ") + e.what());
  }
  validate(c);
  return c;
}

double minimal_n0(const LambdaSpec& spec, double t) {
  auto ev = std::make_shared<const PsiEvaluator>(spec);
  SpeedCurve curve(ev, Drift::psi, t / 2.0, t);
  return std::ceil(10.0 * curve.v(t));
}

void check_guard(const ExperimentConfig& c) {
  validate(c);
  const double t = c.eps * c.probe_times.front();
  auto ev = std::make_shared<const PsiEvaluator>(c.spec);
  SpeedCurve curve(ev, Drift::psi, t / 2.0, t);
  const double v = curve.v(t);
  if (v > static_cast<double>(c.n0) / 10.0) guard_failure("experiment guard", v, c.n0, t);
}

FluctuationReport run_fluctuation_experiment(const ExperimentConfig& c) {
  check_guard(c);
  const std::size_t m = c.probe_times.size();
  const double t_first = c.eps * c.probe_times.front();
  const double t_last = c.eps * c.probe_times.back();
  const auto table = build_speed_table(c.spec, t_first / 2.0, t_last, 16);
  const auto& curve = *table.curve_v;

  FluctuationReport report;
  report.config = c;
  report.version = LAMCOAL_VERSION;
  report.K = table.constants.K;
  report.entrance_time = curve.time_to_reach(static_cast<double>(c.n0));
  const double s0 = report.entrance_time;
  const double alpha = 1.0 + c.spec.beta;
  const double scale = std::pow(c.eps, -1.0 / alpha);

  report.probes.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    auto& p = report.probes[j];
    const double s = c.eps * c.probe_times[j];
    p.t = c.probe_times[j];
    p.v = curve.v(s);
    p.v_star = table.curve_v_star->v(s);
    p.w = speed_w(table.constants, c.spec.beta, s);
  }

  const auto R = static_cast<std::size_t>(c.replicas);
  std::vector<std::int64_t> n_at(R * m);
  std::vector<double> sup_at(R * m), z_at(R * m);
  const CoalescentSimulator sim(c.spec, c.backend, c.n0);
  std::vector<double> z_grid{0.0};
  z_grid.insert(z_grid.end(), c.probe_times.begin(), c.probe_times.end());

  parallel_for(R, c.workers, [&](std::size_t r) {
    Rng rng(c.seed, streams::coalescent + r);
    SupTracker sup{&curve};
    std::int64_t prev = c.n0;
    std::size_t j = 0;
    auto finish_probe = [&](std::size_t k) {
      const double s = c.eps * c.probe_times[k];
      sup.at(s, prev, prev);
      n_at[r * m + k] = prev;
      sup_at[r * m + k] = sup.running * sup.running;
    };
    sim.run(c.n0, s0, t_last, rng, [&](double t, std::int64_t b) {
      while (j < m && t > c.eps * c.probe_times[j]) finish_probe(j++);
      sup.at(t, prev, b);
      prev = b;
    });
    while (j < m) finish_probe(j++);

    Rng zr(c.seed, streams::limit_process + r);
    const auto z = simulate_Z_direct(c.spec.beta, report.K, z_grid, zr);
    for (std::size_t k = 0; k < m; ++k) z_at[r * m + k] = z.values[k + 1];
  });

  for (std::size_t j = 0; j < m; ++j) {
    auto& p = report.probes[j];
    std::vector<double> ratio;
    for (std::size_t r = 0; r < R; ++r) {
      const auto n = static_cast<double>(n_at[r * m + j]);
      p.n.push_back(n_at[r * m + j]);
      p.x_v.push_back(scale * (n / p.v - 1.0));
      p.x_v_star.push_back(scale * (n / p.v_star - 1.0));
      p.x_w.push_back(scale * (n / p.w - 1.0));
      p.z.push_back(z_at[r * m + j]);
      p.sup_dev2.push_back(sup_at[r * m + j]);
      ratio.push_back(n / p.v);
    }
    const auto& x = c.speed == SpeedChoice::v        ? p.x_v
                    : c.speed == SpeedChoice::v_star ? p.x_v_star
                                                     : p.x_w;
    p.ks_vs_z = two_sample_ks(x, p.z);
    p.ks_v_vs_v_star = two_sample_ks(p.x_v, p.x_v_star);
    p.mean_ratio = summarize(ratio).mean;
    const auto sx = summarize(x);
    p.mean_x = sx.mean;
    p.sd_x = sx.sd;
    p.mean_sup_dev2 = summarize(p.sup_dev2).mean;
  }
  return report;
}

nlohmann::json FluctuationReport::summary_json() const {
  nlohmann::json j;
  j["config"] = config;
  j["version"] = version;
  j["entrance_time"] = entrance_time;
  j["K"] = K;
  j["probes"] = nlohmann::json::array();
  for (const auto& p : probes) {
    j["probes"].push_back({{"t", p.t},
                           {"v", p.v},
                           {"v_star", p.v_star},
                           {"w", p.w},
                           {"ks_vs_z", p.ks_vs_z},
                           {"ks_threshold", p.ks_threshold},
                           {"ks_v_vs_v_star", p.ks_v_vs_v_star},
                           {"mean_ratio", p.mean_ratio},
                           {"mean_x", p.mean_x},
                           {"sd_x", p.sd_x},
                           {"mean_sup_dev2", p.mean_sup_dev2},
                           {"replicas", p.n.size()}});
  }
  return j;
}

SupScalingTable sup_deviation_scaling(const LambdaSpec& spec, std::int64_t n0,
                                      std::vector<double> t_list, std::int64_t replicas,
                                      std::uint64_t seed, Backend backend, unsigned workers) {
  check_times(t_list, "sup-deviation times");
  if (replicas < 2) throw DomainError("sup-deviation: need at least 2 replicas");
  const double t_first = t_list.front(), t_last = t_list.back();
  auto ev = std::make_shared<const PsiEvaluator>(spec);
  const SpeedCurve curve(ev, Drift::psi, t_first / 2.0, t_last);
  const double v_first = curve.v(t_first);
  if (v_first > static_cast<double>(n0) / 10.0)
    guard_failure("sup-deviation guard", v_first, n0, t_first);

  SupScalingTable table;
  table.entrance_time = curve.time_to_reach(static_cast<double>(n0));
  const std::size_t m = t_list.size();
  const auto R = static_cast<std::size_t>(replicas);
  std::vector<double> sup_at(R * m);
  const CoalescentSimulator sim(spec, backend, n0);

  parallel_for(R, workers, [&](std::size_t r) {
    Rng rng(seed, streams::coalescent + r);
    SupTracker sup{&curve};
    std::int64_t prev = n0;
    std::size_t j = 0;
    auto finish = [&](std::size_t k) {
      sup.at(t_list[k], prev, prev);
      sup_at[r * m + k] = sup.running * sup.running;
    };
    sim.run(n0, table.entrance_time, t_last, rng, [&](double t, std::int64_t b) {
      while (j < m && t > t_list[j]) finish(j++);
      sup.at(t, prev, b);
      prev = b;
    });
    while (j < m) finish(j++);
  });

  std::vector<double> means;
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> col(R);
    for (std::size_t r = 0; r < R; ++r) col[r] = sup_at[r * m + k];
    const auto s = summarize(col);
    table.rows.push_back({t_list[k], s.mean, s.sd / std::sqrt(static_cast<double>(R))});
    means.push_back(s.mean);
  }
  if (m >= 2) {
    const auto fit = fit_loglog(t_list, means);
    table.slope = fit.slope;
    table.slope_se = fit.slope_se;
  }
  return table;
}

namespace detail {

std::vector<double> counterexample_profile(double alpha, double beta,
                                           const std::vector<double>& t_grid) {
  check_times(t_grid, "counterexample grid");
  const auto spec = make_perturbed_power(beta, alpha, 1.0, 1.0);
  auto ev = std::make_shared<const PsiEvaluator>(spec);
  const auto constants = asymptotic_constants(spec);
  const double t_hi = t_grid.back();
  const double t_lo = std::min(t_grid.front(), t_hi / 2.0);
  const SpeedCurve curve(ev, Drift::psi, t_lo, t_hi);
  std::vector<double> r;
  for (double t : t_grid) {
    const double w = speed_w(constants, beta, t);
    r.push_back(std::pow(t, -1.0 / (1.0 + beta)) * (w / curve.v(t) - 1.0));
  }
  return r;
}

}  // namespace detail

std::vector<double> counterexample_ratio(double alpha, double beta, std::vector<double> t_grid) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("counterexample: beta must lie in (0,1)");
  if (!(alpha > 0.0 && alpha < beta / (1.0 + beta))) {
    std::ostringstream os;
    os << "counterexample: alpha = " << alpha << " must lie in (0, beta/(1+beta)) = (0, "
       << beta / (1.0 + beta) << "); larger alpha is the regime where w and v are interchangeable";
    throw DomainError(os.str());
  }
  return detail::counterexample_profile(alpha, beta, t_grid);
}

}  // namespace lamcoal
