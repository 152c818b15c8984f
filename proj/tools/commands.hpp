#pragma once

#include <json.hpp>

#include "config.hpp"

namespace hypdiss::cli {

enum ExitCode : int { kExitPass = 0, kExitError = 1, kExitFail = 2, kExitMarginal = 3 };

// Each command writes its artifacts under <output_dir>/<command>/ and returns an exit code.
// Errors other than verdicts propagate as hypdiss::Error.
[[nodiscard]] int cmd_check(const RunConfig& config);
[[nodiscard]] int cmd_dispersion(const RunConfig& config);
[[nodiscard]] int cmd_decay(const RunConfig& config);
[[nodiscard]] int cmd_simulate(const RunConfig& config);
[[nodiscard]] int cmd_paradiff_test(const RunConfig& config);
[[nodiscard]] int cmd_report(const RunConfig& config);

// Dispatches on config.command; load and solver errors become kExitError with a
// message on stderr and an error.json next to the other artifacts.
[[nodiscard]] int run_command(const RunConfig& config);

// The paradiff invariant suite: one entry per named check with value, limit and pass flag.
[[nodiscard]] nlohmann::json paradiff_suite(const RunConfig& config);

}  // namespace hypdiss::cli
