#pragma once

// Verification suites, sweeps and the command-line front end.
//
// A report is JSON lines: one header object {suite, seed, environment,
// checks, failed}, then one record per check sorted by check id.

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sobscale/io.hpp"

namespace sobscale::cli {

/// Invalid command line or configuration (exit status 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckRecord {
  std::string check;   // "<suite>/<name>/<index>"
  std::string anchor;  // the statement the check exercises, or "plumbing"
  Json inputs;
  Json measured;
  Json bound;
  bool pass = false;
};

struct Report {
  std::string suite;
  std::uint64_t seed = 0;
  Json environment;
  std::vector<CheckRecord> records;  // sorted by check id

  int failed() const;
};

const std::vector<std::string>& suite_names();

/// Runs `suite` (or every suite for "all") with the sections of `config`
/// that it reads. Throws UsageError for unknown suites and malformed specs.
Report run_suite(const std::string& suite, const Json& config, std::uint64_t seed);

void write_report(std::ostream& out, const Report& report);

struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
};

/// axis: N (patch-norm ratio interval), eps (same versus the cover radius),
/// theta (interpolation norm against the endpoint norms), s (embedding
/// integral of t^s, n = 1, k = 0).
SweepTable emit_sweep(const std::string& axis, const std::vector<double>& values, const Json& config,
                      std::uint64_t seed);

void write_csv(std::ostream& out, const SweepTable& table);

/// Full front end; returns the process exit status (0 pass, 1 failed checks,
/// 2 usage error). Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& err);

}  // namespace sobscale::cli
