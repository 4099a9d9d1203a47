#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "hrcalc/errors.hpp"
#include "hrcalc/experiments/cli.hpp"
#include "hrcalc/experiments/suites.hpp"
#include "hrcalc/kalman.hpp"
#include "hrcalc/augmentation.hpp"

namespace hrcalc::experiments {
namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hrcalc_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(cli({"--help"}).code, kExitOk);
  EXPECT_EQ(cli({"flight", "--help"}).code, kExitOk);
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"nonsense"}).code, kExitUsage);
  EXPECT_EQ(cli({"flight", "--steps", "many"}).code, kExitUsage);
  EXPECT_EQ(cli({"flight", "--set", "nonsense=1"}).code, kExitUsage);
  EXPECT_EQ(cli({"flight", "--set", "dt"}).code, kExitUsage);
  EXPECT_EQ(cli({"flight", "--config", "/nonexistent/x.cfg"}).code, kExitUsage);
  EXPECT_EQ(cli({"flight", "--set", "r_coupling=6"}).code, kExitUsage);
  EXPECT_EQ(cli({"qubit-compile", "--set", "gates="}).code, kExitUsage);
  EXPECT_EQ(cli({"selfcheck", "--set", "suites=nope"}).code, kExitUsage);
}

TEST(Cli, NumericErrorExitCode) {
  // A step size far beyond the stability bound diverges.
  const CliResult r = cli({"qlms", "--set", "gamma=1e6", "--steps", "500"});
  EXPECT_EQ(r.code, kExitNumeric) << r.err;
}

TEST(Cli, HeaderEchoesScenarioSeedAndParameters) {
  const CliResult r = cli({"flight", "--seed", "42", "--steps", "10", "--set", "t_scale=20"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.rfind("# hrcalc ", 0), 0u);
  EXPECT_NE(r.out.find("# scenario = flight\n"), std::string::npos);
  EXPECT_NE(r.out.find("# seed = 42\n"), std::string::npos);
  EXPECT_NE(r.out.find("# steps = 10\n"), std::string::npos);
  EXPECT_NE(r.out.find("# t_scale = 20\n"), std::string::npos);
  EXPECT_NE(r.out.find("\nstep,t,phi_r"), std::string::npos);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto cfg = temp_file("prec.cfg");
  {
    std::ofstream os(cfg);
    os << "seed = 5\nsteps = 12\nt_scale = 30\n";
  }
  const CliResult a = cli({"flight", "--config", cfg.string()});
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_NE(a.out.find("# seed = 5\n"), std::string::npos);
  EXPECT_NE(a.out.find("# steps = 12\n"), std::string::npos);
  const CliResult b =
      cli({"flight", "--config", cfg.string(), "--seed", "6", "--set", "t_scale=40"});
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_NE(b.out.find("# seed = 6\n"), std::string::npos);
  EXPECT_NE(b.out.find("# t_scale = 40\n"), std::string::npos);
  std::filesystem::remove(cfg);
}

TEST(Cli, OutFileMatchesStdoutAndIsDeterministic) {
  const auto path = temp_file("out.csv");
  const CliResult a = cli({"motion", "--steps", "300", "--seed", "3"});
  const CliResult b = cli({"motion", "--steps", "300", "--seed", "3", "--out", path.string()});
  ASSERT_EQ(a.code, kExitOk);
  ASSERT_EQ(b.code, kExitOk);
  EXPECT_TRUE(b.out.empty());
  EXPECT_EQ(slurp(path), a.out);
  EXPECT_EQ(cli({"motion", "--steps", "300", "--seed", "3"}).out, a.out);
  EXPECT_NE(cli({"motion", "--steps", "300", "--seed", "4"}).out, a.out);
  std::filesystem::remove(path);
  EXPECT_EQ(cli({"motion", "--out", "/nonexistent/dir/x.csv"}).code, kExitUsage);
}

TEST(Cli, SelfcheckPassesAndNegativeControlFails) {
  const CliResult ok = cli({"selfcheck", "--set", "suites=algebra,augmentation"});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_NE(ok.out.find("\nsuite,name,residual,limit\n"), std::string::npos);
  EXPECT_NE(ok.out.find("\naugmentation,inverse_is_quarter_adjoint_M2,"), std::string::npos);

  const CliResult bad =
      cli({"selfcheck", "--set", "suites=augmentation", "--perturb-augmentation", "1e-6"});
  EXPECT_EQ(bad.code, kExitCheckFailed);
  EXPECT_NE(bad.err.find("FAIL augmentation,inverse_is_quarter_adjoint"), std::string::npos);
  // The hook is cleared afterwards.
  EXPECT_EQ(test_hooks::augmentation_perturbation(), 0.0);
  EXPECT_EQ(cli({"selfcheck", "--set", "suites=augmentation"}).code, kExitOk);
}

TEST(Cli, SelfcheckLinesAreMachineParseable) {
  const CliResult r = cli({"selfcheck", "--set", "suites=gradient"});
  ASSERT_EQ(r.code, kExitOk);
  std::istringstream is(r.out);
  std::string line;
  int rows = 0;
  bool past_header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!past_header) {
      EXPECT_EQ(line, "suite,name,residual,limit");
      past_header = true;
      continue;
    }
    std::stringstream ls(line);
    std::string suite, name, residual, limit;
    ASSERT_TRUE(std::getline(ls, suite, ',') && std::getline(ls, name, ',') &&
                std::getline(ls, residual, ',') && std::getline(ls, limit));
    EXPECT_EQ(suite, "gradient");
    EXPECT_NO_THROW((void)std::stod(residual));
    EXPECT_NO_THROW((void)std::stod(limit));
    ++rows;
  }
  EXPECT_GT(rows, 5);
}

TEST(Cli, GenericRunnersSucceed) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"qlms", "--steps", "200"},
           {"kalman", "--steps", "50"},
           {"diffusion", "--steps", "50"},
           {"federated", "--steps", "5"},
           {"qnn-train", "--steps", "50"},
           {"qnn-train", "--steps", "20", "--set", "trainer=numeric"},
           {"lqr"},
           {"gradcheck", "--steps", "20"},
       }) {
    const CliResult r = cli(args);
    EXPECT_EQ(r.code, kExitOk) << args[0] << ": " << r.err;
  }
}

TEST(Cli, GradcheckFailureExitsOne) {
  // An impossible tolerance turns every instance into a failure.
  const CliResult r = cli({"gradcheck", "--steps", "5", "--set", "tol=0"});
  EXPECT_EQ(r.code, kExitCheckFailed);
}

TEST(Cli, KalmanReadsModelFile) {
  const auto path = temp_file("model.txt");
  {
    Eigen::MatrixXd f = 0.5 * Eigen::MatrixXd::Identity(4, 4);
    f(0, 1) = 0.2;
    const StateSpaceModel m{augmented_operator_from_real(f), {},
                            augmented_operator_from_real(Eigen::MatrixXd::Identity(4, 4)),
                            augmented_covariance_from_real(0.1 * Eigen::MatrixXd::Identity(4, 4)),
                            augmented_covariance_from_real(0.2 * Eigen::MatrixXd::Identity(4, 4))};
    std::ofstream os(path);
    write_model(os, m);
  }
  const CliResult r = cli({"kalman", "--steps", "30", "--set", "model=" + path.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("\nstep,err0_r"), std::string::npos);
  std::filesystem::remove(path);
}

TEST(Cli, QnnCheckpointRoundTrip) {
  const auto ckpt = temp_file("net.ckpt");
  ASSERT_EQ(cli({"qnn-train", "--steps", "30", "--set", "save=" + ckpt.string()}).code, kExitOk);
  const CliResult resumed = cli({"qnn-train", "--steps", "5", "--set", "load=" + ckpt.string()});
  EXPECT_EQ(resumed.code, kExitOk) << resumed.err;
  const CliResult wrong = cli(
      {"qnn-train", "--steps", "5", "--set", "sizes=3,1", "--set", "load=" + ckpt.string()});
  EXPECT_EQ(wrong.code, kExitUsage);
  std::filesystem::remove(ckpt);
}

// ----------------------------------------------------------------- suites

TEST(Suites, SignTest) {
  EXPECT_DOUBLE_EQ(sign_test_p_value(0, 10), 1.0);
  EXPECT_NEAR(sign_test_p_value(10, 10), 1.0 / 1024.0, 1e-15);
  EXPECT_NEAR(sign_test_p_value(9, 10), 11.0 / 1024.0, 1e-15);
}

TEST(Suites, RecorderSemantics) {
  SuiteRecorder r("demo");
  r.check("at_limit", 1.0, [] { return 1.0; });
  r.check("at_limit_strict", 1.0, [] { return 1.0; }, true);
  r.check("throws", 1.0, []() -> double { throw NumericError("boom"); });
  r.check("nan", 1.0, [] { return std::nan(""); });
  const auto& res = r.results();
  ASSERT_EQ(res.size(), 4u);
  EXPECT_TRUE(res[0].passed());
  EXPECT_FALSE(res[1].passed());
  EXPECT_FALSE(res[2].passed());
  EXPECT_EQ(res[2].error, "boom");
  EXPECT_FALSE(res[3].passed());
}

TEST(Suites, RegistryCoversModulesAndCriteria) {
  std::set<std::string> names, modules;
  std::set<int> criteria;
  for (const auto& s : all_suites()) {
    EXPECT_TRUE(names.insert(s.name).second) << s.name;
    modules.insert(s.module);
    criteria.insert(s.criterion);
  }
  for (const char* m : {"quat-core", "quat-linalg", "hr-calculus", "adaptive-filters", "fusion-network",
                        "qnn", "control-lqr", "experiments-cli"})
    EXPECT_TRUE(modules.count(m)) << m;
  for (int c = 1; c <= 9; ++c) EXPECT_TRUE(criteria.count(c)) << c;
  EXPECT_THROW(find_suite("missing"), UsageError);
}

}  // namespace
}  // namespace hrcalc::experiments
