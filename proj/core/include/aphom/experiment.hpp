#pragma once

#include <string>

#include "aphom/report.hpp"

namespace aphom::experiment {

/// Exit-code contract shared by the CLI and CI:
///   0 ok, 1 assertion failure, 2 config error, 3 field invalid, 4 solver failure.
enum ExitCode { Ok = 0, AssertionFailure = 1, ConfigError = 2, FieldInvalid = 3, SolverFailure = 4 };

struct RunOptions {
    std::string outDir;       // empty = no artifacts written
    std::uint64_t seed = 0;   // overrides the config seed when nonZeroSeed
    bool overrideSeed = false;
    int threads = 0;          // 0 = resolve from APHOM_THREADS / default 1
};

/// Parse and execute one experiment config (JSON text). Known kinds:
/// field-check | rho | corrector | effective | dual | growth | cauchy |
/// theta | twoscale | rate | profile | liouville.
report::ExperimentReport run(const std::string& configJson, const RunOptions& opts);

/// Convenience: read the config from a file path (relative field paths are
/// resolved against the config's directory).
report::ExperimentReport runFile(const std::string& configPath, const RunOptions& opts);

/// Exit code for a finished report (0 or 1); exceptions map via errorExitCode.
int exitCodeFor(const report::ExperimentReport& rep);
int errorExitCode(const std::exception& e);

}  // namespace aphom::experiment
