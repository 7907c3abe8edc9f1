#include "laplace/json_io.hpp"
#include "laplace/runs.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using laplace::Json;

namespace {

struct Proc {
  int code = -1;
  std::string out;
  std::string err;
};

Proc run_cli(const std::string& args, const std::string& env = "") {
  const auto err_path = std::filesystem::temp_directory_path() / ("laplace_cli_err_" + std::to_string(::getpid()));
  const std::string cmd = env + " " + LAPLACE_CLI_PATH + std::string(" ") + args + " 2>" + err_path.string();
  Proc p;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return p;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) p.out.append(buf.data(), got);
  const int status = ::pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream ef(err_path);
  std::stringstream ss;
  ss << ef.rdbuf();
  p.err = ss.str();
  std::filesystem::remove(err_path);
  return p;
}

Json json_of(const Proc& p) { return Json::parse(p.out); }

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << body;
  return path.string();
}

}  // namespace

TEST(Cli, ExpandQuarticReportsExactA2) {
  const Proc p = run_cli("expand --builtin quartic --d 2 --n 64 --L 2");
  ASSERT_EQ(p.code, 0) << p.err;
  const Json r = json_of(p);
  ASSERT_EQ(r["terms"].size(), 1u);
  EXPECT_EQ(r["terms"][0]["exact"], "-1/3");
  EXPECT_DOUBLE_EQ(r["terms"][0]["term"].get<double>(), -1.0 / 3.0 / 64.0);
  EXPECT_TRUE(r.contains("certificate"));
  EXPECT_EQ(r["schema_version"], laplace::kReportSchemaVersion);
  EXPECT_FALSE(r["certificate"]["constants_tracked"].get<bool>());
}

TEST(Cli, ExpandGaussianTermsVanish) {
  const Proc p = run_cli("expand --builtin gaussian --d 3 --n 100 --L 3 --oracle");
  const Json r = json_of(p);
  for (const auto& t : r["terms"]) EXPECT_EQ(t["exact"], "0");
  EXPECT_LE(std::abs(r["true_remainder"]["rem"].get<double>()), 1e-9);
  // a zero remainder cannot be resolved to 25%, which is reported as inconclusive
  EXPECT_EQ(p.code, 2);
}

TEST(Cli, VerifyStirling) {
  const Proc p = run_cli("verify --builtin stirling1d --n 50 --L 2");
  ASSERT_EQ(p.code, 0) << p.err;
  const Json r = json_of(p);
  const double rem = r["true_remainder"]["rem"].get<double>();
  EXPECT_NEAR(rem * 288.0 * 2500.0, 1.0, 0.2);
  EXPECT_FALSE(r["true_remainder"]["inconclusive"].get<bool>());
}

TEST(Cli, ConfigEchoIsFullyResolved) {
  const Json r = json_of(run_cli("expand --builtin quartic --d 2 --n 64 --L 2"));
  const Json& c = r["config"];
  EXPECT_EQ(c["seed"], 1);
  EXPECT_EQ(c["coeff_method"], "auto");
  EXPECT_GT(c["R"].get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(c["R"].get<double>(), r["R"].get<double>());
  EXPECT_EQ(c["problem"]["builtin"], "quartic");
  EXPECT_EQ(c["oracle"]["mode"], "auto");
}

TEST(Cli, ReproducibleAcrossRunsAndThreads) {
  const std::string args = "expand --builtin quartic --d 3 --n 400 --L 2 --coeff-method mc --coeff-samples 50000 --seed 5";
  const Proc a = run_cli(args + " --threads 1");
  const Proc b = run_cli(args + " --threads 3");
  const Json ja = json_of(a), jb = json_of(b);
  EXPECT_EQ(ja["terms"], jb["terms"]);
  EXPECT_EQ(ja["terms"][0]["method"], "mc");
  EXPECT_EQ(run_cli(args + " --threads 1").out, a.out);
}

TEST(Cli, ThreadsFromEnvironment) {
  const Json r = json_of(run_cli("expand --builtin quartic --d 2 --n 64", "LAPLACE_THREADS=3"));
  EXPECT_EQ(r["config"]["threads"], 3);
}

TEST(Cli, MalformedConfigsExitOne) {
  Proc p = run_cli("expand --d 2");
  EXPECT_EQ(p.code, 1);
  EXPECT_NE(p.err.find("problem source"), std::string::npos) << p.err;
  p = run_cli("expand --builtin quartic --L 0");
  EXPECT_EQ(p.code, 1);
  EXPECT_NE(p.err.find("L:"), std::string::npos) << p.err;
  p = run_cli("expand --builtin nosuch");
  EXPECT_EQ(p.code, 1);
  EXPECT_NE(p.err.find("nosuch"), std::string::npos);
  p = run_cli("expand --builtin quartic --problem x.json");
  EXPECT_EQ(p.code, 1);
  p = run_cli("verify --builtin quartic --oracle-mode sometimes");
  EXPECT_EQ(p.code, 1);
  EXPECT_NE(p.err.find("oracle mode"), std::string::npos) << p.err;
  EXPECT_EQ(run_cli("").code, 1);
}

TEST(Cli, HelpExitsZero) {
  const Proc p = run_cli("--help");
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("verify"), std::string::npos);
}

TEST(Cli, JetProblemFile) {
  // 1-d Stirling jet: f = 1, v^(k)(0) = (-1)^k (k-1)!
  const std::string doc = R"({"n": 50, "L": 2, "jets": {
    "f": [{"order": 0, "dim": 1, "entries": [[[0], 1]]},
          {"order": 1, "dim": 1, "entries": [[[1], 0]]},
          {"order": 2, "dim": 1, "entries": [[[2], 0]]},
          {"order": 3, "dim": 1, "entries": [[[3], 0]]},
          {"order": 4, "dim": 1, "entries": [[[4], 0]]}],
    "v": [{"order": 3, "dim": 1, "entries": [[[3], -2]]},
          {"order": 4, "dim": 1, "entries": [[[4], 6]]},
          {"order": 5, "dim": 1, "entries": [[[5], -24]]},
          {"order": 6, "dim": 1, "entries": [[[6], "120"]]}]}})";
  const std::string path = temp_file("laplace_jet_problem.json", doc);
  const Proc p = run_cli("expand --problem " + path);
  ASSERT_EQ(p.code, 0) << p.err;
  const Json r = json_of(p);
  EXPECT_EQ(r["terms"][0]["exact"], "1/12");
  const std::string short_path = temp_file("laplace_short_jet.json", R"({"n": 50, "L": 2, "jets": {
    "f": [{"order": 0, "dim": 1, "entries": [[[0], 1]]}], "v": []}})");
  const Proc s = run_cli("expand --problem " + short_path);
  EXPECT_EQ(s.code, 1);
  EXPECT_NE(s.err.find("2L+2"), std::string::npos) << s.err;
  std::filesystem::remove(short_path);
  EXPECT_EQ(r["certificate"]["profileR"]["method"], "jet");
  const Proc v = run_cli("verify --problem " + path);
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.err.find("jets alone"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, BuiltinProblemFile) {
  const std::string path = temp_file("laplace_builtin_problem.json", R"({"builtin": "quartic", "d": 2, "n": 64, "L": 2})");
  const Json r = json_of(run_cli("expand --problem " + path));
  EXPECT_EQ(r["terms"][0]["exact"], "-1/3");
  std::filesystem::remove(path);
}

TEST(Cli, QuarticCsvToStdout) {
  const Proc p = run_cli("quartic --Ls 1 --dims 2 --csv -");
  ASSERT_EQ(p.code, 0);
  EXPECT_EQ(p.out.rfind("L,d,n,eps2,rem,error,ratio,precision\n", 0), 0u);
  EXPECT_EQ(std::count(p.out.begin(), p.out.end(), '\n'), 4);
}

TEST(Cli, SweepCsvColumns) {
  const auto csv = std::filesystem::temp_directory_path() / "laplace_sweep.csv";
  const Proc p = run_cli("verify --builtin quartic --d 2 --n 64 --L 1 --sweep-n 64,256,1024 --csv " + csv.string());
  ASSERT_EQ(p.code, 0) << p.err;
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "d,n,L,epsilon,kappa_kernel,tauL_kernel,tauUc,true_remainder,ci_low,ci_high");
  int rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(json_of(p)["sweep"].size(), 3u);
  std::filesystem::remove(csv);
}

TEST(Cli, OutFileAndCaveatsOnStderr) {
  const auto out = std::filesystem::temp_directory_path() / "laplace_bound.json";
  const Proc p = run_cli("bound --builtin glm-logistic --d 2 --n 64 --out " + out.string());
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(p.out.empty());
  EXPECT_NE(p.err.find("sampled lower bounds"), std::string::npos);
  std::ifstream f(out);
  const Json r = Json::parse(f);
  EXPECT_EQ(r["kind"], "bound");
  EXPECT_TRUE(r["growth"]["checks"].is_array());
  std::filesystem::remove(out);
}

TEST(Cli, ChaosAndGlmSubcommands) {
  const Json c = json_of(run_cli("chaos --dims 2,4 --samples 4000 --restricted-R 1"));
  EXPECT_EQ(c["moments"].size(), 2u);
  EXPECT_TRUE(c["restricted_exp"]["rows"][0]["gradient_smaller"].get<bool>());
  const Proc g = run_cli("glm --d 2 --n 64 --L 1 --oracle-budget 20000");
  ASSERT_EQ(g.code, 0) << g.err;
  const Json gj = json_of(g);
  EXPECT_NEAR(gj["points"][0]["A2_formula"].get<double>(), gj["points"][0]["A2_explicit"].get<double>(), 1e-9);
}

TEST(Cli, SchemaShipsAndMatchesVersion) {
  std::ifstream f(LAPLACE_SCHEMA_PATH);
  ASSERT_TRUE(f.good());
  const Json s = Json::parse(f);
  EXPECT_EQ(s["properties"]["schema_version"]["const"], laplace::kReportSchemaVersion);
}
