#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace hrcalc::experiments {

// One invariant check. It passes when residual <= limit, or residual < limit
// for strict checks (ratios that must stay below one, p-values). Checks of
// the form "x must exceed t" are reported as the ratio t / x.
struct CheckResult {
  std::string suite, name;
  double residual = 0.0, limit = 0.0;
  bool strict = false;
  std::string error;  // exception text when the check threw
  bool passed() const;
};

class SuiteRecorder {
 public:
  explicit SuiteRecorder(std::string suite) : suite_(std::move(suite)) {}
  // Runs fn for the residual. Exceptions become failed checks, so a suite
  // never stops early.
  void check(const std::string& name, double limit, const std::function<double()>& fn,
             bool strict = false);
  const std::vector<CheckResult>& results() const { return results_; }

 private:
  std::string suite_;
  std::vector<CheckResult> results_;
};

struct SuiteInfo {
  std::string name;
  std::string module;
  int criterion = 0;  // acceptance criterion covered, 0 for none
  std::function<void(SuiteRecorder&)> run;
};

// Suites in run order: algebra, augmentation, gradient, qlms, kalman, lqr,
// fusion, qnn, three-phase, bearings, motion, qubit. The flight checks live
// in the lqr suite.
const std::vector<SuiteInfo>& all_suites();
const SuiteInfo& find_suite(const std::string& name);  // UsageError when unknown
std::vector<CheckResult> run_suite(const SuiteInfo& suite);

// `suite,name,residual,limit` with shortest round-trip reals.
void write_check_line(std::ostream& os, const CheckResult& c);

// One-sided sign test: P(X >= wins) for X ~ Binomial(trials, 1/2).
double sign_test_p_value(std::size_t wins, std::size_t trials);

}  // namespace hrcalc::experiments
