#include "lamcoal/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"

#include "lamcoal/coalescent.hpp"
#include "lamcoal/errors.hpp"
#include "lamcoal/harness.hpp"
#include "lamcoal/io.hpp"
#include "lamcoal/parallel.hpp"
#include "lamcoal/psi.hpp"
#include "lamcoal/speed.hpp"
#include "lamcoal/stable.hpp"
#include "lamcoal/statistics.hpp"

namespace lamcoal {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Options of one subcommand, kept as raw strings so that values given on the
// command line can be layered over a JSON config file.
struct Command {
  CLI::App* app = nullptr;
  std::vector<std::string> keys;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;

  void option(const std::string& key, const std::string& help) {
    std::string flag = "--" + key;
    for (auto& ch : flag)
      if (ch == '_') ch = '-';
    if (key.find('_') != std::string::npos) {
      std::string joined = "--";
      for (char ch : key)
        if (ch != '_') joined += ch;
      flag += "," + joined;
    }
    keys.push_back(key);
    opts[key] = app->add_option(flag, raw[key], help);
  }
};

json parse_value(const std::string& s) {
  try {
    auto j = json::parse(s);
    if (j.is_number() || j.is_boolean() || j.is_array() || j.is_object()) return j;
  } catch (const json::exception&) {
  }
  return s;
}

[[noreturn]] void bad_field(const std::string& key, const char* expected) {
  throw DomainError("config field \"" + key + "\" must be " + expected);
}

double get_double(const json& c, const std::string& key, double fallback) {
  if (!c.contains(key)) return fallback;
  const auto& v = c.at(key);
  if (v.is_number()) return v.get<double>();
  bad_field(key, "a number");
}

std::int64_t get_int(const json& c, const std::string& key, std::int64_t fallback) {
  if (!c.contains(key)) return fallback;
  const auto& v = c.at(key);
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float() && v.get<double>() == std::floor(v.get<double>()) &&
      std::abs(v.get<double>()) < 9e15)
    return static_cast<std::int64_t>(v.get<double>());
  bad_field(key, "an integer");
}

std::string get_string(const json& c, const std::string& key, const std::string& fallback) {
  if (!c.contains(key)) return fallback;
  const auto& v = c.at(key);
  if (v.is_string()) return v.get<std::string>();
  bad_field(key, "a string");
}

std::vector<double> get_list(const json& c, const std::string& key,
                             const std::vector<double>& fallback) {
  if (!c.contains(key)) return fallback;
  const auto& v = c.at(key);
  if (v.is_number()) return {v.get<double>()};
  std::vector<double> out;
  if (v.is_array()) {
    for (const auto& e : v) {
      if (!e.is_number()) bad_field(key, "a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto j = parse_value(item);
      if (!j.is_number()) bad_field(key, "a list of numbers");
      out.push_back(j.get<double>());
    }
    if (!out.empty()) return out;
  }
  bad_field(key, "a list of numbers");
}

LambdaSpec get_spec(const json& c) {
  if (!c.contains("spec")) return make_beta(0.5, 1.5);
  const auto& v = c.at("spec");
  if (v.is_object()) return lambda_from_json(v);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (!s.empty() && s.front() == '{') return lambda_from_json(parse_value(s));
    return lambda_from_json(read_json(s));
  }
  bad_field("spec", "a measure description or the path of one");
}

// Merges the config file (if any) with the flags given on the command line.
json resolve(const Command& cmd) {
  json cfg = json::object();
  const auto it = cmd.raw.find("config");
  if (cmd.opts.at("config")->count() > 0) {
    cfg = read_json(it->second);
    if (!cfg.is_object()) throw DomainError("config file must hold a JSON object");
    for (const auto& [key, _] : cfg.items())
      if (key == "config" ||
          std::find(cmd.keys.begin(), cmd.keys.end(), key) == cmd.keys.end())
        throw DomainError("unknown config field \"" + key + "\"");
  }
  for (const auto& key : cmd.keys) {
    if (key == "config") continue;
    if (cmd.opts.at(key)->count() > 0) cfg[key] = parse_value(cmd.raw.at(key));
  }
  return cfg;
}

fs::path output_dir(const json& cfg) {
  std::string dir = get_string(cfg, "out_dir", "");
  if (dir.empty()) {
    const char* env = std::getenv("LAMCOAL_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::create_directories(dir);
  return dir;
}

struct Context {
  json cfg;
  fs::path dir;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  RunManifest* manifest = nullptr;
  std::ostream* out = nullptr;

  fs::path file(const std::string& name) const { return dir / name; }
  void done(const fs::path& p) const {
    manifest->add_output(p);
    *out << p.string() << '\n';
  }
};

void cmd_psi_eval(const Context& ctx) {
  const auto spec = get_spec(ctx.cfg);
  const auto qs = get_list(ctx.cfg, "q", {1.0});
  const PsiEvaluator ev(spec);
  const auto path = ctx.file("psi_eval.csv");
  CsvWriter csv(path, {"q", "psi", "psi_star", "h", "h_prime"});
  for (double q : qs) {
    csv << q << ev.psi(q) << ev.psi_star(q) << ev.h(q) << ev.h_prime(q);
    csv.end_row();
  }
  csv.close();
  ctx.done(path);
}

void cmd_speed_table(const Context& ctx) {
  const auto spec = get_spec(ctx.cfg);
  const auto table = build_speed_table(spec, get_double(ctx.cfg, "t_min", 1e-4),
                                       get_double(ctx.cfg, "t_max", 1.0),
                                       static_cast<int>(get_int(ctx.cfg, "n", 64)));
  const auto path = ctx.file("speed_table.csv");
  CsvWriter csv(path, {"t", "v", "v_star", "w"});
  for (std::size_t i = 0; i < table.t.size(); ++i) {
    csv << table.t[i] << table.v[i] << table.v_star[i] << table.w[i];
    csv.end_row();
  }
  csv.close();
  ctx.done(path);
}

void cmd_simulate(const Context& ctx) {
  const auto spec = get_spec(ctx.cfg);
  const auto n0 = get_int(ctx.cfg, "n0", 100);
  const double t_end = get_double(ctx.cfg, "t_end", 1.0);
  const auto replicas = get_int(ctx.cfg, "replicas", 10);
  const auto backend = backend_from_string(get_string(ctx.cfg, "backend", "chain"));
  const double delta = get_double(ctx.cfg, "delta", 0.0);
  const bool summary = ctx.cfg.value("summary", false);
  if (replicas < 1) throw DomainError("simulate: replicas must be positive");
  if (!(t_end > 0.0)) throw DomainError("simulate: t_end must be positive");
  const CoalescentSimulator sim(spec, backend, n0, delta);
  std::vector<CoalescentPath> paths(static_cast<std::size_t>(replicas));
  parallel_for(paths.size(), ctx.workers, [&](std::size_t r) {
    paths[r] = sim.path(n0, 0.0, t_end, ctx.seed, streams::coalescent + r);
  });
  if (summary) {
    std::vector<double> final_n;
    for (const auto& p : paths) final_n.push_back(static_cast<double>(p.counts.back()));
    const auto path = ctx.file("simulate_summary.csv");
    CsvWriter csv(path, {"quantity", "value"});
    const auto s = summarize(final_n);
    csv << std::string("mean") << s.mean;
    csv.end_row();
    csv << std::string("sd") << s.sd;
    csv.end_row();
    for (double q : {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0}) {
      csv << "q" + format_double(q) << quantile(final_n, q);
      csv.end_row();
    }
    csv.close();
    ctx.done(path);
    return;
  }
  const auto path = ctx.file("simulate.csv");
  CsvWriter csv(path, {"replica", "jump_time", "N"});
  for (std::size_t r = 0; r < paths.size(); ++r)
    for (std::size_t i = 0; i < paths[r].times.size(); ++i) {
      csv << static_cast<std::int64_t>(r) << paths[r].times[i] << paths[r].counts[i];
      csv.end_row();
    }
  csv.close();
  ctx.done(path);
}

void cmd_stable_sample(const Context& ctx) {
  StableParams p;
  p.alpha = get_double(ctx.cfg, "alpha", 1.5);
  p.scale = get_double(ctx.cfg, "scale", 1.0);
  p.skew = static_cast<int>(get_int(ctx.cfg, "skew", 1));
  validate(p);
  const auto n = get_int(ctx.cfg, "n", 1000);
  if (n < 1) throw DomainError("stable-sample: n must be positive");
  Rng rng(ctx.seed, streams::auxiliary);
  const auto path = ctx.file("stable_sample.csv");
  CsvWriter csv(path, {"x"});
  for (std::int64_t i = 0; i < n; ++i) {
    csv << sample_skewed_stable(p, rng);
    csv.end_row();
  }
  csv.close();
  ctx.done(path);
}

void cmd_simulate_z(const Context& ctx) {
  const double beta = get_double(ctx.cfg, "beta", 0.5);
  const double K = ctx.cfg.contains("K")
                       ? get_double(ctx.cfg, "K", 0.0)
                       : asymptotic_constants(make_beta(beta, 1.0 + beta)).K;
  auto grid = get_list(ctx.cfg, "grid", {0.25, 0.5, 1.0});
  const auto route = get_string(ctx.cfg, "route", "direct");
  const auto replicas = get_int(ctx.cfg, "replicas", 1000);
  if (replicas < 1) throw DomainError("simulate-z: replicas must be positive");
  if (route == "direct") {
    if (grid.empty() || grid.front() != 0.0) grid.insert(grid.begin(), 0.0);
  } else if (route != "sde") {
    throw DomainError("simulate-z: route must be direct or sde");
  }
  std::vector<StablePath> paths(static_cast<std::size_t>(replicas));
  parallel_for(paths.size(), ctx.workers, [&](std::size_t r) {
    Rng rng(ctx.seed, streams::limit_process + r);
    paths[r] = route == "direct" ? simulate_Z_direct(beta, K, grid, rng)
                                 : simulate_Z_sde(beta, K, grid, rng);
  });
  const auto path = ctx.file("simulate_z.csv");
  CsvWriter csv(path, {"replica", "t", "Z"});
  for (std::size_t r = 0; r < paths.size(); ++r)
    for (std::size_t i = 0; i < paths[r].times.size(); ++i) {
      csv << static_cast<std::int64_t>(r) << paths[r].times[i] << paths[r].values[i];
      csv.end_row();
    }
  csv.close();
  ctx.done(path);
}

void cmd_fluctuations(const Context& ctx) {
  json ej = json::object();
  for (const char* key : {"spec", "n0", "eps", "probe_times", "replicas", "backend", "speed",
                          "output_path"})
    if (ctx.cfg.contains(key)) ej[key] = ctx.cfg.at(key);
  if (ej.contains("spec") && ej["spec"].is_string()) {
    json spec_json;
    to_json(spec_json, get_spec(ctx.cfg));
    ej["spec"] = spec_json;
  }
  if (ej.contains("probe_times")) ej["probe_times"] = get_list(ctx.cfg, "probe_times", {});
  ej["seed"] = ctx.seed;
  ej["workers"] = ctx.workers;
  const auto config = experiment_config_from_json(ej);
  const auto report = run_fluctuation_experiment(config);

  auto summary = report.summary_json();
  summary["config"].erase("workers");
  const auto rpath = ctx.file("fluctuations_report.json");
  write_json(rpath, summary);
  const auto spath = ctx.file("fluctuations_samples.csv");
  CsvWriter csv(spath, {"replica", "t", "N", "X_v", "X_v_star", "X_w", "Z", "sup_dev2"});
  for (const auto& p : report.probes)
    for (std::size_t r = 0; r < p.n.size(); ++r) {
      csv << static_cast<std::int64_t>(r) << p.t << p.n[r] << p.x_v[r] << p.x_v_star[r] << p.x_w[r]
          << p.z[r] << p.sup_dev2[r];
      csv.end_row();
    }
  csv.close();
  ctx.done(rpath);
  ctx.done(spath);
}

void cmd_sup_scaling(const Context& ctx) {
  const auto spec = get_spec(ctx.cfg);
  const auto table = sup_deviation_scaling(
      spec, get_int(ctx.cfg, "n0", 200000),
      get_list(ctx.cfg, "t_list", {0.01, 0.0215443469003188, 0.0464158883361278, 0.1}),
      get_int(ctx.cfg, "replicas", 1000), ctx.seed,
      backend_from_string(get_string(ctx.cfg, "backend", "thinned")), ctx.workers);
  const auto path = ctx.file("sup_scaling.csv");
  CsvWriter csv(path, {"t", "mean_sup_dev2", "se"});
  for (const auto& r : table.rows) {
    csv << r.t << r.mean << r.se;
    csv.end_row();
  }
  csv.close();
  const auto fpath = ctx.file("sup_scaling_fit.json");
  write_json(fpath, {{"slope", table.slope},
                     {"slope_se", table.slope_se},
                     {"entrance_time", table.entrance_time}});
  ctx.done(path);
  ctx.done(fpath);
}

void cmd_counterexample(const Context& ctx) {
  const double alpha = get_double(ctx.cfg, "alpha", 0.2);
  const double beta = get_double(ctx.cfg, "beta", 0.5);
  const auto grid = get_list(ctx.cfg, "tgrid", {1e-6, 1e-5, 1e-4, 1e-3, 1e-2});
  const auto r = counterexample_ratio(alpha, beta, grid);
  const auto path = ctx.file("counterexample.csv");
  CsvWriter csv(path, {"t", "r"});
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv << grid[i] << r[i];
    csv.end_row();
  }
  csv.close();
  ctx.done(path);
}

using Handler = void (*)(const Context&);

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Block-counting fluctuations of Lambda-coalescents", "lamcoal"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LAMCOAL_VERSION);

  std::vector<std::unique_ptr<Command>> commands;
  std::map<CLI::App*, std::pair<Command*, Handler>> handlers;
  auto add = [&](const char* name, const char* help, Handler h,
                 std::initializer_list<std::pair<const char*, const char*>> opts) {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    cmd->option("config", "JSON file with option values; flags override it");
    cmd->option("seed", "master seed (default 1)");
    cmd->option("workers", "worker threads (default: hardware parallelism)");
    cmd->option("out_dir", "output directory (default $LAMCOAL_OUT_DIR or .)");
    for (const auto& [key, text] : opts) cmd->option(key, text);
    handlers[cmd->app] = {cmd.get(), h};
    commands.push_back(std::move(cmd));
  };
  const char* spec_help = "measure description: JSON file or inline JSON (default beta 0.5, 1.5)";
  add("psi-eval", "evaluate psi, psi*, h and h' at points q", cmd_psi_eval,
      {{"spec", spec_help}, {"q", "comma-separated q >= 1"}});
  add("speed-table", "tabulate v, v* and w", cmd_speed_table,
      {{"spec", spec_help}, {"t_min", "smallest t"}, {"t_max", "largest t"}, {"n", "grid points"}});
  add("simulate", "simulate block-counting paths", cmd_simulate,
      {{"spec", spec_help},
       {"n0", "initial number of blocks"},
       {"t_end", "final time"},
       {"replicas", "number of paths"},
       {"backend", "chain, poisson or thinned"},
       {"delta", "fixed cutoff of the poisson backend (0: adaptive)"},
       {"summary", "true: write quantiles of N(t_end) instead of paths"}});
  add("stable-sample", "draw totally skewed stable variables", cmd_stable_sample,
      {{"alpha", "index in (1,2)"}, {"scale", "scale > 0"}, {"skew", "+1 or -1"}, {"n", "draws"}});
  add("simulate-z", "simulate the stable limit process Z", cmd_simulate_z,
      {{"beta", "beta in (0,1)"},
       {"K", "noise scale (default from the Beta(beta, 1+beta) measure)"},
       {"grid", "comma-separated times"},
       {"route", "direct or sde"},
       {"replicas", "number of paths"}});
  add("fluctuations", "compare rescaled fluctuations with the stable limit", cmd_fluctuations,
      {{"spec", spec_help},
       {"n0", "initial number of blocks"},
       {"eps", "time scale"},
       {"probe_times", "comma-separated probe times"},
       {"replicas", "number of replicas (>= 100)"},
       {"backend", "chain, poisson or thinned"},
       {"speed", "v, v_star or w"},
       {"output_path", "free-form label echoed in the report"}});
  add("sup-scaling", "second moment of the sup-deviation against t", cmd_sup_scaling,
      {{"spec", spec_help},
       {"n0", "initial number of blocks"},
       {"t_list", "comma-separated times"},
       {"replicas", "number of replicas"},
       {"backend", "chain, poisson or thinned"}});
  add("counterexample", "r(t) for the perturbed power measure", cmd_counterexample,
      {{"alpha", "perturbation exponent"}, {"beta", "beta in (0,1)"}, {"tgrid", "comma-separated times"}});

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name

  RunManifest manifest;
  manifest.version = LAMCOAL_VERSION;
  manifest.started = utc_timestamp();
  fs::path dir = ".";
  int code = exit_code::ok;
  bool have_dir = false;

  try {
    app.parse(reversed);
    CLI::App* sub = app.get_subcommands().front();
    auto [cmd, handler] = handlers.at(sub);
    manifest.subcommand = sub->get_name();
    if (cmd->opts.at("out_dir")->count() > 0) {
      // so that a refused config still leaves its manifest where asked
      dir = cmd->raw.at("out_dir");
      have_dir = !dir.empty();
    }
    Context ctx;
    ctx.cfg = resolve(*cmd);
    dir = output_dir(ctx.cfg);
    have_dir = true;
    ctx.dir = dir;
    ctx.seed = static_cast<std::uint64_t>(get_int(ctx.cfg, "seed", 1));
    ctx.workers = static_cast<unsigned>(get_int(ctx.cfg, "workers", 0));
    ctx.manifest = &manifest;
    ctx.out = &out;
    manifest.config = ctx.cfg;
    manifest.seed = ctx.seed;
    handler(ctx);
    manifest.status = "ok";
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    manifest.status = "refused";
    manifest.message = e.what();
    code = exit_code::refused;
  } catch (const GuardError& e) {
    err << "lamcoal: " << e.what() << '\n';
    manifest.status = "refused";
    manifest.message = e.what();
    manifest.config["minimal_n0"] = e.minimal_n0();
    code = exit_code::refused;
  } catch (const DomainError& e) {
    err << "lamcoal: " << e.what() << '\n';
    manifest.status = "refused";
    manifest.message = e.what();
    code = exit_code::refused;
  } catch (const CapacityError& e) {
    err << "lamcoal: " << e.what() << '\n';
    manifest.status = "refused";
    manifest.message = e.what();
    code = exit_code::refused;
  } catch (const std::exception& e) {
    err << "lamcoal: " << e.what() << '\n';
    manifest.status = "failed";
    manifest.message = e.what();
    code = exit_code::numeric_failure;
  }

  manifest.exit_code = code;
  manifest.finished = utc_timestamp();
  try {
    if (have_dir) {
      fs::create_directories(dir);
    } else {
      const char* env = std::getenv("LAMCOAL_OUT_DIR");
      dir = env && *env ? env : ".";
      fs::create_directories(dir);
    }
    const std::string name =
        (manifest.subcommand.empty() ? std::string("lamcoal") : manifest.subcommand) +
        ".manifest.json";
    write_json(dir / name, manifest.to_json());
  } catch (const std::exception& e) {
    err << "lamcoal: could not write manifest: " << e.what() << '\n';
  }
  return code;
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace lamcoal
