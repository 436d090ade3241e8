#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "snq/config.hpp"

namespace snq {

struct CheckResult {
  std::string name;
  int criterion = 0;        // acceptance criterion this check belongs to
  double analytic = 0.0;    // formula value (or tolerance for deterministic checks)
  double estimate = 0.0;    // Monte Carlo estimate (or achieved value)
  double se = 0.0;          // 0 for deterministic checks
  double z = 0.0;           // (estimate - analytic)/se when se > 0
  bool pass = false;
  std::string detail;
  std::vector<std::string> ops;  // analytics operations exercised
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_pass() const;
  std::vector<std::string> covered_ops() const;
  // Operations from the analytics surface that no check exercised; the
  // verify contract requires this to be empty.
  std::vector<std::string> missing_ops() const;
  void write_json(std::ostream& os) const;
};

// Names of the analytics operations the verify suite must cover.
const std::vector<std::string>& analytics_op_names();

// Runs the full formula-vs-simulation suite. Replication counts are the
// pinned acceptance sizes scaled by rep_scale (floored at 500) so unit tests
// can run a fast pass.
VerifyReport run_verify(const ExperimentConfig& cfg, double rep_scale = 1.0);

}  // namespace snq
