#pragma once

#include <string>
#include <vector>

namespace tensorconc::verify {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;  // measured numbers, always printed
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;
  bool all_pass() const;
};

/// Suites runnable from the CLI; each bundles one or more numbered
/// acceptance criteria at pinned parameters.
const std::vector<std::string>& suite_names();

/// Runs a named suite. `config_dir` holds the versioned sweep grids;
/// workers = 0 uses the hardware count. Throws std::invalid_argument for
/// unknown suite names.
SuiteResult run_suite(const std::string& name, const std::string& config_dir,
                      int workers = 0);

/// Default config directory baked at build time (the repo's configs/).
std::string default_config_dir();

}  // namespace tensorconc::verify
