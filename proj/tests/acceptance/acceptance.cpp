// Acceptance runner: one PASS/FAIL line per criterion. Criteria 1-9 run the
// self-check suites mapped to them and enforce their runtime limits;
// criterion 10 runs every CLI command twice in-process and compares bytes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "hrcalc/experiments/cli.hpp"
#include "hrcalc/experiments/suites.hpp"
#include "hrcalc/io.hpp"

namespace {

using hrcalc::format_real;
using namespace hrcalc::experiments;

struct Criterion {
  int id;
  std::string title;
  double limit_s;
};

const std::vector<Criterion> kCriteria = {
    {1, "algebra suite", 1.0},          {2, "augmentation suite", 5.0},
    {3, "gradient suite", 10.0},        {4, "kalman suite", 60.0},
    {5, "lqr suite", 30.0},             {6, "fusion suite", 120.0},
    {7, "qnn suite", 120.0},            {8, "three-phase suite", 60.0},
    {9, "bearings suite", 120.0},
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool run_criterion(const Criterion& c) {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t checks = 0;
  std::vector<std::string> failures;
  for (const auto& s : all_suites()) {
    if (s.criterion != c.id) continue;
    for (const auto& r : run_suite(s)) {
      ++checks;
      if (!r.passed())
        failures.push_back(r.name + " residual " + format_real(r.residual) + (r.strict ? " !< " : " > ") +
                           format_real(r.limit) + (r.error.empty() ? "" : " (" + r.error + ")"));
    }
  }
  const double dt = seconds_since(t0);
  const bool in_time = dt < c.limit_s;
  const bool ok = checks > 0 && failures.empty() && in_time;
  std::ostringstream line;
  line << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.title << ", " << checks << " checks, "
       << failures.size() << " failed, " << format_real(std::round(dt * 1000.0) / 1000.0) << " s (limit "
       << format_real(c.limit_s) << " s)";
  if (!in_time) line << ", over the time limit";
  if (checks == 0) line << ", no checks registered";
  std::cout << line.str() << '\n';
  for (const auto& f : failures) std::cout << "    " << f << '\n';
  std::cout.flush();
  return ok;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Runs `args` twice, once to stdout and once through --out, twice each, and
// compares the outputs byte for byte.
bool deterministic(const std::vector<std::string>& args, const std::filesystem::path& dir,
                   std::string& why) {
  std::string stdout_run[2], file_run[2];
  for (int k = 0; k < 2; ++k) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != kExitOk) {
      why = "exit code " + std::to_string(code) + ": " + err.str();
      return false;
    }
    stdout_run[k] = out.str();
    const auto path = dir / ("run" + std::to_string(k) + ".csv");
    std::vector<std::string> with_out = args;
    with_out.push_back("--out");
    with_out.push_back(path.string());
    std::ostringstream out2, err2;
    if (run_cli(with_out, out2, err2) != kExitOk) {
      why = "file run failed: " + err2.str();
      return false;
    }
    file_run[k] = read_file(path);
  }
  if (stdout_run[0].empty() || stdout_run[0].rfind("# hrcalc ", 0) != 0) {
    why = "output does not start with the comment header";
    return false;
  }
  if (stdout_run[0] != stdout_run[1] || file_run[0] != file_run[1]) {
    why = "outputs differ between identical runs";
    return false;
  }
  if (stdout_run[0] != file_run[0]) {
    why = "stdout and --out outputs differ";
    return false;
  }
  return true;
}

bool run_determinism() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto dir = std::filesystem::temp_directory_path() / "hrcalc_acceptance";
  std::filesystem::create_directories(dir);
  // A config file exercises the file path of the parameter plumbing.
  const auto config = dir / "three_phase.cfg";
  {
    std::ofstream os(config);
    os << "# fault run\nfault_time = 0.3\nnoise_std = 0.01\nsteps = 600\nseed = 7\n";
  }
  const std::vector<std::vector<std::string>> runs = {
      {"selfcheck", "--set", "suites=algebra,augmentation,gradient,qlms,lqr,motion,qubit"},
      {"three-phase", "--config", config.string()},
      {"bearings", "--seed", "3", "--steps", "60"},
      {"flight", "--seed", "2"},
      {"motion", "--seed", "4", "--steps", "1500"},
      {"qubit-compile", "--seed", "5"},
      {"qlms", "--seed", "6"},
      {"kalman", "--seed", "7"},
      {"diffusion", "--seed", "8", "--steps", "200"},
      {"federated", "--seed", "9"},
      {"qnn-train", "--seed", "10", "--steps", "300", "--set", "trainer=numeric"},
      {"qnn-train", "--seed", "10", "--steps", "300"},
      {"lqr", "--seed", "11"},
      {"gradcheck", "--seed", "12", "--steps", "30"},
  };
  std::vector<std::string> covered, failures;
  for (const auto& args : runs) {
    std::string why;
    if (!deterministic(args, dir, why)) failures.push_back(args[0] + ": " + why);
    covered.push_back(args[0]);
  }
  for (const auto& name : cli_commands())
    if (std::find(covered.begin(), covered.end(), name) == covered.end())
      failures.push_back(name + ": not exercised");
  std::filesystem::remove_all(dir);
  const bool ok = failures.empty();
  std::cout << (ok ? "PASS" : "FAIL") << " criterion 10: determinism, " << runs.size()
            << " command runs x 2 (stdout and --out), " << failures.size() << " failed, "
            << format_real(std::round(seconds_since(t0) * 1000.0) / 1000.0) << " s\n";
  for (const auto& f : failures) std::cout << "    " << f << '\n';
  return ok;
}

}  // namespace

int main() {
  bool all = true;
  for (const auto& c : kCriteria) all = run_criterion(c) && all;
  all = run_determinism() && all;
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << '\n';
  return all ? 0 : 1;
}
