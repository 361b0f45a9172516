#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "ccn/problem.hpp"
#include "ccn/solvers.hpp"

namespace ccn {

/// Unit tangent in the norm ||(u, lambda)||^2 = u^T W u + lambda^2.
struct Tangent {
    Vector du;
    double dlambda = 0.0;
};

struct BranchPoint {
    double s = 0.0;
    Solution solution;
    Tangent tangent;
    bool is_fold = false;
};

enum class BranchStatus { WindowExit, FoldLimit, MaxPoints, Stagnated };
const char* to_string(BranchStatus s);

/// Parameter window; each end can be open or closed.
struct LambdaWindow {
    double lo = -1.0;
    double hi = 1.0;
    bool lo_closed = true;
    bool hi_closed = true;

    bool contains(double lambda) const {
        return (lo_closed ? lambda >= lo : lambda > lo) && (hi_closed ? lambda <= hi : lambda < hi);
    }
};

struct Branch {
    std::vector<BranchPoint> points;
    double eps = 0.0;
    std::vector<std::size_t> folds;  ///< index k: the tangent's lambda component flips between k and k + 1
    std::optional<double> lambda0_estimate;
    BranchStatus status = BranchStatus::MaxPoints;
    int corrector_failures = 0;
};

struct TraceOptions {
    double ds = 0.05;
    LambdaWindow window;
    int max_points = 500;
    double newton_tol = 1e-10;
    /// Stop with FoldLimit once this many folds have been passed.
    std::optional<int> max_folds;
    /// Refine the first fold with locate_fold to fill lambda0_estimate.
    bool refine_fold = true;
    /// Evaluate gamma1 at every accepted point.
    bool compute_gamma1 = true;
};

/// Inner product and norm of the continuation space.
double arc_dot(const Vector& W, const Vector& u1, double l1, const Vector& u2, double l2);

/// Tangent at a solution from the bordered system, oriented to have positive
/// inner product with `reference`.
Tangent compute_tangent(const ProblemSpec& spec, const Solution& sol, const Tangent& reference);

/// First point off the trivial line for eps > 0.
///
/// Predictor: u = ds * alpha * 1, lambda = sign * ds * beta, with the constant
/// mode dominating; corrected on the hyperplane orthogonal to that direction.
/// The returned tangent points toward growing u.
BranchPoint start_from_zero(const ProblemSpec& spec, int dlambda_sign, double ds, double newton_tol = 1e-10);

/// Minimal-branch point at small lambda > 0 for eps = 0 and int a < 0, from the
/// guess c* lambda^{1/(p-q)}. Validates gamma1 > 0.
Solution start_from_asymptotic(const ProblemSpec& spec, double lambda_small, double newton_tol = 1e-10);

/// Same as start_from_asymptotic without the lambda <= 0.1 restriction.
Solution minimal_solution_near_zero(const ProblemSpec& spec, double lambda, double newton_tol = 1e-10);

/// Pseudo-arclength continuation from a corrected point.
Branch trace_branch(const ProblemSpec& spec, const BranchPoint& start, const TraceOptions& opts);

/// Starts from a solution; the initial tangent has dlambda of sign `direction`.
Branch trace_branch(const ProblemSpec& spec, const Solution& start, const TraceOptions& opts, int direction = +1);

struct FoldResult {
    double lambda0 = 0.0;
    Solution solution;
    double gamma1 = 0.0;
    double dlambda = 0.0;  ///< tangent lambda component at the refined point
    int bisections = 0;
};

/// Bisection along the secant direction between the bracketing points until
/// |dlambda| <= 1e-8. Throws ContractError when `index` is not a flagged fold and
/// ContinuationError when the bracket is lost.
FoldResult locate_fold(const ProblemSpec& spec, const Branch& branch, std::size_t index, double newton_tol = 1e-10);

struct WhyburnOptions {
    TraceOptions trace;
    int dlambda_sign = -1;
    double tol = 1e-2;
    double dead_core_tol = 1e-6;
    int grid_points = 200;
    bool parallel = true;
};

struct WhyburnReport {
    std::vector<double> eps_schedule;
    std::vector<Branch> branches;
    std::vector<double> pairwise_distances;
    bool converged = false;
    Branch limit_branch;
    /// Per point of limit_branch: nodes with u below dead_core_tol.
    std::vector<std::vector<std::size_t>> dead_core_nodes;
    std::optional<std::string> failure;
};

/// Traces one branch per eps from the trivial line and measures how they settle.
WhyburnReport whyburn_limit(const ProblemSpec& spec_template, const std::vector<double>& eps_schedule,
                            const WhyburnOptions& opts);

/// Sup over a common lambda grid of ||u_1 - u_2||_inf, comparing fold-free
/// segments pairwise in order. Returns +inf when no segments overlap.
double branch_distance(const Branch& b1, const Branch& b2, int grid_points = 200);

}  // namespace ccn
