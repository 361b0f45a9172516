#pragma once

#include <functional>
#include <iosfwd>

#include <json.hpp>

#include "ccn/config.hpp"
#include "ccn/continuation.hpp"

namespace ccn {

enum ExitStatus : int { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitVerification = 3 };

/// Injection points used by tests.
struct RunHooks {
    /// Called on every traced branch before it is audited and exported.
    std::function<void(Branch&)> after_trace;
};

struct RunOutcome {
    int exit_code = kExitOk;
    nlohmann::json summary;
};

/// Executes the plan and writes the requested artifacts. Never throws for
/// failures covered by the exit-status contract; the summary records them.
RunOutcome run(const RunPlan& plan, const RunHooks& hooks = {});

/// Parses the config at `path`, runs it, writes the JSON summary to out_json or
/// to `out`, diagnostics to `err`, and returns the exit status.
int run_config_file(const std::filesystem::path& path, std::ostream& out, std::ostream& err,
                    const RunHooks& hooks = {});

}  // namespace ccn
