#pragma once

#include <string>
#include <vector>

namespace apd {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
  std::string relation;  // how measured compares to threshold, e.g. "<="
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Suites: coupler, coupling, desiderata, bonferroni, chain-rule, window.
std::vector<std::string> verify_suite_names();

/// Runs one suite on the built-in models. Throws ValidationError for an
/// unknown name.
SuiteReport run_verify_suite(const std::string& name);

/// Monte-Carlo size used by the coupler and coupling suites.
inline constexpr unsigned kCouplerSamples = 100'000;

}  // namespace apd
