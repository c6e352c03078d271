#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "lamcoal/cli.hpp"
#include "lamcoal/io.hpp"

using namespace lamcoal;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "lamcoal");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lamcoal_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("help and bad flags") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({"psi-eval", "--help"}).code == 0);
  const auto dir = scratch("flags");
  // a run that fails while parsing flags falls back to $LAMCOAL_OUT_DIR
  setenv("LAMCOAL_OUT_DIR", dir.string().c_str(), 1);
  const auto r = cli({"psi-eval", "--bogus", "1"});
  CHECK(r.code == 2);
  CHECK(!r.err.empty());
  CHECK(read_json(dir / "lamcoal.manifest.json")["status"] == "refused");
  CHECK(cli({"no-such-command"}).code == 2);
  unsetenv("LAMCOAL_OUT_DIR");
}

TEST_CASE("psi-eval writes CSV and a manifest with digests") {
  const auto dir = scratch("psi");
  const auto r = cli({"psi-eval", "--q", "1,2,3", "--out-dir", dir.string()});
  REQUIRE(r.code == 0);
  const auto csv = slurp(dir / "psi_eval.csv");
  CHECK(csv.rfind("q,psi,psi_star,h,h_prime\n", 0) == 0);
  CHECK(csv.find("\n3,2.7") != std::string::npos);
  const auto m = read_json(dir / "psi-eval.manifest.json");
  CHECK(m["status"] == "ok");
  CHECK(m["exit_code"] == 0);
  REQUIRE(m["outputs"].size() == 1);
  CHECK(m["outputs"][0]["sha256"] == sha256_file(dir / "psi_eval.csv"));
}

TEST_CASE("config file with flag override") {
  const auto dir = scratch("config");
  write_json(dir / "cfg.json", {{"alpha", 0.2}, {"beta", 0.5}, {"tgrid", {1e-4, 1e-2}}});
  auto r = cli({"counterexample", "--config", (dir / "cfg.json").string(), "--out-dir",
                dir.string(), "--tgrid", "1e-3,1e-2"});
  REQUIRE(r.code == 0);
  const auto csv = slurp(dir / "counterexample.csv");
  CHECK(csv.find("\n0.001,") != std::string::npos);
  CHECK(csv.find("\n0.0001,") == std::string::npos);

  write_json(dir / "bad.json", {{"alpha", 0.2}, {"typo", 1}});
  r = cli({"counterexample", "--config", (dir / "bad.json").string(), "--out-dir", dir.string()});
  CHECK(r.code == 2);
  CHECK(read_json(dir / "counterexample.manifest.json")["status"] == "refused");
  {
    std::ofstream(dir / "broken.json") << "{ not json";
  }
  r = cli({"counterexample", "--config", (dir / "broken.json").string(), "--out-dir", dir.string()});
  CHECK(r.code == 2);
  r = cli({"counterexample", "--alpha", "0.4", "--out-dir", dir.string()});
  CHECK(r.code == 2);
  CHECK(read_json(dir / "counterexample.manifest.json")["status"] == "refused");
}

TEST_CASE("fluctuations guard refusal names the minimal n0") {
  const auto dir = scratch("guard");
  write_json(dir / "cfg.json", {{"n0", 20000}, {"eps", 1e-3}, {"probe_times", {0.5, 1.0}}});
  const auto r = cli({"fluctuations", "--config", (dir / "cfg.json").string(), "--out-dir",
                      dir.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("70721183") != std::string::npos);
  CHECK(fs::exists(dir / "fluctuations.manifest.json"));
}

TEST_CASE("outputs are byte-identical for a repeated seed") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& d : {a, b}) {
    REQUIRE(cli({"simulate", "--n0", "50", "--t-end", "0.5", "--replicas", "5", "--backend",
                 "thinned", "--seed", "9", "--out-dir", d.string()})
                .code == 0);
    REQUIRE(cli({"stable-sample", "--n", "100", "--seed", "9", "--out-dir", d.string()}).code == 0);
  }
  CHECK(slurp(a / "simulate.csv") == slurp(b / "simulate.csv"));
  CHECK(slurp(a / "stable_sample.csv") == slurp(b / "stable_sample.csv"));
  const auto c = scratch("det_c");
  REQUIRE(cli({"stable-sample", "--n", "100", "--seed", "10", "--out-dir", c.string()}).code == 0);
  CHECK(slurp(a / "stable_sample.csv") != slurp(c / "stable_sample.csv"));
}
