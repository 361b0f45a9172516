#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccn/continuation.hpp"
#include "ccn/problem.hpp"
#include "ccn/solvers.hpp"

namespace ccn {

/// int a + lambda int b (u + eps)^{q-2} u^{2-p}, i.e. the weighted sum obtained by
/// testing the equation with u^{1-p}. For eps = 0 this is int a + lambda int b u^{q-p};
/// it is negative on every nonconstant positive discrete solution.
///
/// Throws InapplicableError for (numerically) constant u and DomainError when
/// min u <= kUFloor.
double nonexistence_identity(const ProblemSpec& spec, double lambda, const Solution& solution);

/// min_i u_i / phi_i with phi the principal eigenfunction of sigma_lambda at Lambda.
/// Requires lambda >= Lambda > 0 and u > 0; throws DomainError otherwise.
double positivity_floor(const ProblemSpec& spec, double Lambda, const Solution& solution);

struct FloorScan {
    double delta0 = 0.0;        ///< +inf when nothing was selected
    std::size_t selected = 0;   ///< number of branch points with lambda <= -Lambda
};

/// Smallest max u over branch points with lambda <= -Lambda.
FloorScan lower_bound_scan(const Branch& branch, double Lambda);

struct BoundCertificate {
    double C = 0.0;
    Vector w0;
    Vector w1;
    double lambda_window = 0.0;
    double C1 = 0.0;
    double max_b = 0.0;   ///< over the closure of the mask
    double max_w0 = 0.0;  ///< over the closure of the mask
    double worst_margin = 0.0;  ///< smallest supersolution residual over the validation cases
};

/// C = max{C1, (Lambda max_b)^{1/(2-q)} (1 + max_w0)^{(q-1)/(2-q)}}, the
/// (2-q)-th root of max{C1^{2-q}, Lambda max_b (1 + max_w0)^{q-1}}.
double certificate_constant(double C1, double Lambda, double max_b, double max_w0, double q);

/// Builds w0 (Dirichlet Poisson with unit load on the mask), the constant C and
/// w1 = C(1 + w0), then checks that w1 is a discrete supersolution on the mask
/// for lambda in {0, Lambda} and eps in {0, 1}.
///
/// Throws ConfigError for an empty mask, DomainError when a >= 0 somewhere on the
/// mask or Lambda < 0 or C1 < 0, CertificateError when validation fails.
BoundCertificate build_supersolution(const ProblemSpec& spec, double Lambda, double C1, const std::vector<bool>& mask);

/// Nodes where a < -kSignTol.
std::vector<bool> negative_set(const ProblemSpec& spec);

/// A mixed problem on the mesh: u = C1 on the Gamma_0 boundary nodes, weak
/// inequalities with reaction f in the interior and g on the rest of the boundary.
struct ComparisonProblem {
    const Mesh* mesh = nullptr;
    std::vector<bool> dirichlet_mask;  ///< Gamma_0, a subset of the boundary nodes (may be empty)
    double C1 = 0.0;
    std::function<double(std::size_t node, double t)> f;
    std::function<double(std::size_t node, double t)> g;  ///< empty means g = 0
};

struct ComparisonResult {
    bool verdict = false;
    double max_violation = 0.0;  ///< max(0, max_i u_i - v_i)
    std::string failing;         ///< first failed hypothesis or conclusion, empty on success
};

/// Tests the discrete weak sub/supersolution inequalities against every nodal
/// basis function off Gamma_0 (tolerance 1e-9 scale), the boundary order
/// u <= C1 <= v on Gamma_0, and then the conclusion u <= v + 1e-9.
///
/// Throws ContractError on shape mismatch and DomainError when u or v is negative
/// or v is not positive at an interior node.
ComparisonResult comparison_check(const ComparisonProblem& problem, const Vector& u, const Vector& v);

struct AsymptoticRow {
    double lambda = 0.0;
    double e = 0.0;                       ///< ||lambda^{-1/(p-q)} u - c*||_inf
    double u_max = 0.0;
    std::optional<double> cross_check;    ///< ||u_newton - u_monotone||_inf when a constant supersolution exists
    std::optional<bool> below_previous;   ///< u strictly below the previous (larger lambda) row at every node
    std::optional<std::string> error;
    Solution solution;
};

struct AsymptoticTable {
    double c_star = 0.0;
    std::vector<AsymptoticRow> rows;
    bool e_decreasing = false;
    bool monotone_in_lambda = false;
};

/// Minimal solutions on a decreasing list of small lambdas and their distance to
/// the constant limit profile. Requires int a < 0 (DomainError) and a strictly
/// decreasing list in (0, 0.2] of length >= 3 (ConfigError).
AsymptoticTable asymptotic_check(const ProblemSpec& spec, const std::vector<double>& lambda_list,
                                 double newton_tol = 1e-10);

/// Points of a run with int a >= 0 that contradict the predicted picture.
struct FigureOneAudit {
    std::size_t points = 0;
    std::size_t lambda_violations = 0;    ///< points with lambda >= 0
    std::size_t stable_nonconstant = 0;   ///< nonconstant points with gamma1 >= 0
};

FigureOneAudit audit_figure_one(const Branch& branch);

}  // namespace ccn
