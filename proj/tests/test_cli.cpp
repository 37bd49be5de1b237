#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string stdout_text;
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path log = fs::temp_directory_path() / ("wplab_cli_" + std::to_string(counter++) + ".log");
  std::string cmd = std::string(WPLAB_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  int ret = std::system(cmd.c_str());
  RunResult out;
  out.exit_code = WEXITSTATUS(ret);
  std::ifstream is(log);
  std::stringstream ss;
  ss << is.rdbuf();
  out.stdout_text = ss.str();
  fs::remove(log);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  fs::path d = fs::temp_directory_path() / ("wplab_test_" + tag);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("exponents prints chi and q") {
  auto d = temp_dir("exponents");
  auto r = run_cli("exponents --D 4 --p 2 --out " + d.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("chi=2") != std::string::npos);
  CHECK(r.stdout_text.find("q=4") != std::string::npos);
  CHECK(fs::exists(d / "exponents.json"));

  // supercritical input is rejected
  auto bad = run_cli("exponents --D 2 --p 2 --out " + d.string());
  CHECK(bad.exit_code == 2);
}

TEST_CASE("unknown flags and subcommands exit 2") {
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("exponents --D 4 --p 2 --no-such-flag 1").exit_code == 2);
}

TEST_CASE("dim runs are byte-identical for a fixed seed") {
  auto d1 = temp_dir("dim1");
  auto d2 = temp_dir("dim2");
  std::string args = "dim --weight monomial:1,1 --dim 2 --region cube --samples 60 --seed 7 --out ";
  auto r1 = run_cli(args + d1.string());
  auto r2 = run_cli(args + d2.string());
  CHECK(r1.exit_code == 0);
  CHECK(r2.exit_code == 0);
  CHECK(r1.stdout_text == r2.stdout_text);
  CHECK(slurp(d1 / "dim.json") == slurp(d2 / "dim.json"));
  CHECK(slurp(d1 / "dim.csv") == slurp(d2 / "dim.csv"));
  CHECK(r1.stdout_text.find("D_hat=4") != std::string::npos);

  // the JSON embeds the resolved configuration
  auto j = nlohmann::json::parse(slurp(d1 / "dim.json"));
  CHECK(j.contains("config"));
  CHECK(j["config"]["seed"] == 7);
}

TEST_CASE("shoot emits a profile whose tail decays at the critical rate") {
  auto d = temp_dir("shoot");
  auto r = run_cli("shoot --p 2 --D 4 --alpha 1 --rmax 50 --out " + d.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(d / "shoot.csv"));
  CHECK(fs::exists(d / "shoot.gp"));
  auto j = nlohmann::json::parse(slurp(d / "shoot.json"));
  CHECK(j["classification"] == "decaying");
  double expo = j["decay_fit"]["exponent"].get<double>();
  CHECK(std::abs(expo - 2.0) < 0.1);
}

TEST_CASE("solve exit codes reflect convergence") {
  auto d = temp_dir("solve");
  auto ok = run_cli(
      "solve --p 2 --domain 0,1,0,1 --nodes 17,17 --bc linear:0,1,0 "
      "--f const:0 --out " + d.string());
  CHECK(ok.exit_code == 0);
  CHECK(fs::exists(d / "solve.field"));

  auto bad = run_cli(
      "solve --p 2 --domain 0,1,0,1 --nodes 33,33 --bc const:0 --f const:1 "
      "--max-sweeps 2 --solver-rel-tol 1e-16 --out " + d.string());
  CHECK(bad.exit_code == 1);
}

TEST_CASE("compare consumes solve snapshots") {
  auto d1 = temp_dir("cmp_u");
  auto d2 = temp_dir("cmp_v");
  auto dc = temp_dir("cmp_out");
  run_cli("solve --p 2 --domain 0,1,0,1 --nodes 17,17 --bc const:0 --f const:0.5 --out " + d1.string());
  run_cli("solve --p 2 --domain 0,1,0,1 --nodes 17,17 --bc const:0.1 --f const:1 --out " + d2.string());
  auto r = run_cli("compare --u " + (d1 / "solve.field").string() + " --v " +
                   (d2 / "solve.field").string() + " --tol 1e-6 --out " + dc.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("holds") != std::string::npos);
}

TEST_CASE("config file values are read and flags override them") {
  auto d = temp_dir("config");
  fs::path cfg = d / "run.cfg";
  std::ofstream(cfg) << "D=4\np=2\n";
  auto r = run_cli("exponents --config " + cfg.string() + " --out " + d.string());
  CHECK(r.exit_code == 0);
  CHECK(r.stdout_text.find("q=4") != std::string::npos);
  auto r2 = run_cli("exponents --config " + cfg.string() + " --D 3 --out " + d.string());
  CHECK(r2.exit_code == 0);
  CHECK(r2.stdout_text.find("q=6") != std::string::npos);
}

TEST_CASE("moser and tail subcommands emit reports") {
  auto d = temp_dir("moser");
  auto r = run_cli("moser --p 2 --D 4 --out " + d.string());
  CHECK(r.exit_code == 0);
  auto j = nlohmann::json::parse(slurp(d / "moser.json"));
  CHECK(j["rows"].size() > 5);

  auto dt = temp_dir("tail");
  auto rt = run_cli("tail --p 2 --D 4 --power 2 --out " + dt.string());
  CHECK(rt.exit_code == 0);
  auto jt = nlohmann::json::parse(slurp(dt / "tail.json"));
  double theta = jt["theta_hat"].get<double>();
  CHECK(std::abs(theta - 1.0 / 16.0) < 0.01);
}
