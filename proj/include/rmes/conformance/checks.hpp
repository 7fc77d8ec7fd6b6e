#pragma once

// Conformance checks comparing the library against the oracles. Each check
// is deterministic (fixed seeds) and reports a one-line detail string.

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace rmes::conformance {

struct CheckOutcome {
  bool passed = false;
  std::string detail;
};

struct Check {
  std::string id;
  std::string description;
  std::function<CheckOutcome()> run;
};

struct CheckResult {
  std::string id;
  std::string description;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

[[nodiscard]] CheckOutcome check_density_normalization();
[[nodiscard]] CheckOutcome check_density_convolution();
[[nodiscard]] CheckOutcome check_weight_normalization();
[[nodiscard]] CheckOutcome check_mes_closed_form();
[[nodiscard]] CheckOutcome check_rmes_mutual_information();
[[nodiscard]] CheckOutcome check_degenerate_cases();
[[nodiscard]] CheckOutcome check_acquisition_gradients();
[[nodiscard]] CheckOutcome check_gp_dense_oracle();
[[nodiscard]] CheckOutcome check_misconception_scenarios();

[[nodiscard]] std::vector<Check> conformance_checks();

/// Times the check; exceptions count as failures.
[[nodiscard]] CheckResult run_check(const Check& check);

/// Runs every check, writing one `PASS|FAIL id: detail` line per check.
[[nodiscard]] std::vector<CheckResult> run_conformance_suite(std::ostream& out);

}  // namespace rmes::conformance
