#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "lhj/scenario.hpp"

namespace lhj {

// Exit codes (also the per-scenario result codes inside batches):
//   0  success, all checks passed
//   1  unexpected error
//   2  configuration / schema error
//   3  under-resolved kernel request
//   4  no contraction / suspected blow-up abort
//   5  study ran but a check failed
//   6  I/O error
enum ExitCode : int {
  kOk = 0,
  kError = 1,
  kConfig = 2,
  kUnderResolved = 3,
  kNoContraction = 4,
  kCheckFailed = 5,
  kIo = 6,
};

struct RunResult {
  int exit_code = kOk;
  std::string message;
};

// Executes one validated scenario into `out_dir` (created if missing; each
// run owns its directory).  Emits the study CSVs, optional LHJ1 snapshots and
// a manifest.json with the scenario hash and per-check outcomes.
RunResult run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                       std::optional<std::uint64_t> seed_override);

// Loads a configuration (single scenario or batch), fans batches out over
// `jobs` worker threads (batch entries write to out_dir/<name>/) and returns
// the worst exit code.
int run_config(const std::filesystem::path& config, const std::filesystem::path& out_dir,
               std::optional<std::uint64_t> seed_override, int jobs, Study expected_study);

}  // namespace lhj
