#pragma once

#include <memory>
#include <optional>

#include "ccn/mesh.hpp"
#include "ccn/problem.hpp"

namespace ccn {

// ---------------------------------------------------------------------------
// Linear algebra

/// LU factorization of a square sparse matrix, reusable across right-hand sides.
class SparseFactorization {
public:
    /// Throws SingularSystemError if the matrix is numerically singular.
    explicit SparseFactorization(const SparseMatrix& matrix);
    ~SparseFactorization();
    SparseFactorization(SparseFactorization&&) noexcept;
    SparseFactorization& operator=(SparseFactorization&&) noexcept;

    /// Solution with one step of iterative refinement. Throws SingularSystemError
    /// when the result reveals a condition number beyond 1e14 or is not finite.
    Vector solve(const Vector& rhs) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

Vector solve_linear(const SparseMatrix& matrix, const Vector& rhs);

// ---------------------------------------------------------------------------
// Solutions and stability

enum class Stability { Stable, Unstable, Neutral };
const char* to_string(Stability s);

/// Relative width of the neutral band around gamma1 = 0.
inline constexpr double kNeutralBand = 1e-6;

/// Stable if gamma1 > 1e-6 scale, unstable if gamma1 < -1e-6 scale, neutral otherwise.
Stability stability_classify(double gamma1, double scale);

struct Solution {
    Vector u;
    double lambda = 0.0;
    double eps = 0.0;
    double residual_norm = 0.0;
    std::optional<double> gamma1;
    std::optional<Stability> stability;
    int newton_iters = 0;
};

struct NewtonOptions {
    double tol = 1e-10;
    int max_iter = 50;
};

/// Damped Newton for R(u) = 0 at fixed lambda.
///
/// Steps are halved until the iterate stays in the admissible cone
/// (u >= -1e-12 for eps > 0, u >= kUFloor for eps = 0) and until the L2 norm of
/// the pointwise residual decreases; at most 30 halvings per step. For eps = 0 the
/// pointwise residual is further divided by u^{q-1} (and the step is Newton's for
/// that scaled residual) so that the trivial solution does not attract the iteration.
///
/// Throws NoConvergenceError (with last iterate) after max_iter steps,
/// StagnationError when the line search fails, DomainError("left positive cone")
/// when no admissible step exists at eps = 0.
Solution newton_solve(const ProblemSpec& spec, double lambda, const Vector& u0, NewtonOptions opts = {});

// ---------------------------------------------------------------------------
// Eigenvalues

struct EigenResult {
    double value = 0.0;
    Vector vector;  ///< max-norm 1 with max entry +1
    int iterations = 0;
};

/// Smallest sigma of  A phi = W diag(m) phi + sigma W phi  by shifted inverse iteration.
///
/// The shift starts below a Gershgorin bound and is raised toward the Rayleigh
/// quotient only after a Sylvester inertia check confirms it is still below the
/// spectrum. Throws NoConvergenceError after 500 iterations.
EigenResult smallest_eigenpair(const SparseMatrix& stiffness, const Vector& weight_diag, const Vector& mass);

/// Second smallest eigenvalue of the same pencil, by inverse iteration deflated
/// against the principal eigenvector. Used for mesh validation.
EigenResult second_eigenpair(const SparseMatrix& stiffness, const Vector& weight_diag, const Vector& mass);

/// Principal eigenpair of -Lap phi = lambda b phi + sigma phi (Neumann).
EigenResult sigma_lambda(const Mesh& mesh, const CoefficientField& b, double lambda);

/// Principal eigenpair of -Lap phi = lambda eps^{q-2} b phi + sigma phi, eps in (0, 1].
EigenResult sigma_eps(const Mesh& mesh, const CoefficientField& b, double lambda, double eps, double q);

/// Principal eigenvalue of the linearization at the solution, stored back into it
/// together with its stability tag.
double gamma1(const ProblemSpec& spec, Solution& solution);

/// Magnitude used as `scale` for the neutral band of a linearization weight.
double linearization_scale(const Vector& weight_diag);

// ---------------------------------------------------------------------------
// Monotone (sub/supersolution) iteration

enum class Direction { Up, Down };

struct MonotoneOptions {
    std::optional<double> omega;
    /// Upper bound C for the order interval; estimated when absent.
    std::optional<double> upper_bound;
    double tol = 1e-12;
    int cap = 20000;
};

/// Fixed-point iteration u <- (A + omega W)^{-1} W (omega u + a u^{p-1} + lambda b u^{q-1})
/// at eps = 0. Up from a subsolution the iterates increase, down from a
/// supersolution they decrease; a violation beyond 1e-10 throws MonotonicityError.
Solution monotone_iterate(const ProblemSpec& spec, double lambda, const Vector& u0, Direction direction,
                          MonotoneOptions opts = {});

/// The default slope constant used when MonotoneOptions::omega is absent.
double default_omega(const ProblemSpec& spec, double lambda, const Vector& u0, double upper_bound);

}  // namespace ccn
