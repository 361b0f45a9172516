#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccn/continuation.hpp"
#include "ccn/mesh.hpp"
#include "ccn/problem.hpp"

namespace ccn {

enum class Command { Solve, Branch, Whyburn, Verify, Eigen, Classify };
const char* to_string(Command c);

/// Everything a run needs, validated.
struct RunPlan {
    Command command = Command::Classify;
    Domain domain = Domain::interval(0.0, 1.0);
    int n = 64;
    double p = 4.0;
    double q = 1.5;
    std::string a;
    std::string b = "1";
    double eps = 0.0;
    std::vector<double> eps_schedule;
    std::optional<double> gamma_decay;
    std::optional<double> lambda;
    std::optional<LambdaWindow> lambda_window;
    double ds = 0.05;
    int max_points = 500;
    double newton_tol = 1e-10;
    std::optional<std::filesystem::path> out_csv;
    std::optional<std::filesystem::path> out_json;
    std::optional<std::filesystem::path> out_svg;
    bool dump_solutions = false;
    /// Line of each key in the source text.
    std::map<std::string, std::size_t> lines;

    Mesh mesh() const;
    ProblemSpec spec() const;
};

/// The recognised configuration keys.
const std::vector<std::string>& config_keys();

/// Parses `key = value` lines with `#` comments. Values may be double-quoted.
/// Throws ConfigError (carrying the line number when one applies) for unknown or
/// duplicate keys, malformed values, missing required keys and out-of-range
/// parameters.
RunPlan parse_config(std::string_view text);

/// Reads and parses a file; IoError when it cannot be read.
RunPlan load_config(const std::filesystem::path& path);

/// "(0, 3]", "[-2, 0)" or plain "lo, hi" (closed).
LambdaWindow parse_window(std::string_view text);

}  // namespace ccn
