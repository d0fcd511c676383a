#pragma once

#include <ostream>
#include <string>

#include "kmu/config.hpp"

namespace kmu::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitSelftestFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericFailure = 3;

// Each command loads the experiment file, applies the overrides, runs, and
// returns a process exit code; diagnostics and summaries go to `diag`.
int cmd_analytic(const std::string& config_path, const Overrides& overrides,
                 std::ostream& diag);
int cmd_simulate(const std::string& config_path, const Overrides& overrides,
                 std::ostream& diag);
int cmd_compare(const std::string& config_path, const Overrides& overrides,
                std::ostream& diag);

// Fast built-in invariant suite; prints one line per named check.  A non-empty
// force_fail corrupts that check's tolerance so harness plumbing can be tested.
int cmd_selftest(std::ostream& out, const std::string& force_fail = "");

}  // namespace kmu::cli
