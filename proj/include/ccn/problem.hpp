#pragma once

#include <optional>
#include <string>

#include "ccn/expr.hpp"
#include "ccn/mesh.hpp"

namespace ccn {

/// Below this value the eps = 0 linearization is treated as singular.
inline constexpr double kUFloor = 1e-10;

/// Threshold for deciding the sign of a coefficient at a node.
inline constexpr double kSignTol = 1e-12;

/// The datum of the regularized problem
///
///     -Lap u = lambda b(x) (u + eps)^{q-2} u + a(x) u^{p-1},   du/dn = 0,
///
/// which for eps = 0 is the concave-convex Neumann problem itself.
class ProblemSpec {
public:
    /// Throws ConfigError unless 1 < q < 2 < p, 0 <= eps <= 1, b >= 0 with b != 0,
    /// a != 0, gamma_decay > 0 when given, and the fields live on `mesh`.
    ProblemSpec(Mesh mesh, CoefficientField a, CoefficientField b, double p, double q, double eps,
                std::optional<double> gamma_decay = std::nullopt);

    /// Parses and samples the coefficient expressions on the mesh.
    static ProblemSpec from_text(const Mesh& mesh, const std::string& a, const std::string& b, double p, double q,
                                 double eps, std::optional<double> gamma_decay = std::nullopt);

    const Mesh& mesh() const noexcept { return mesh_; }
    const NeumannOperator& op() const noexcept { return op_; }
    const SparseMatrix& stiffness() const noexcept { return op_.stiffness(); }
    const Vector& weights() const noexcept { return mesh_.weights(); }
    const CoefficientField& a() const noexcept { return a_; }
    const CoefficientField& b() const noexcept { return b_; }
    double p() const noexcept { return p_; }
    double q() const noexcept { return q_; }
    double eps() const noexcept { return eps_; }
    const std::optional<double>& gamma_decay() const noexcept { return gamma_decay_; }
    std::size_t size() const noexcept { return mesh_.size(); }

    ProblemSpec with_eps(double eps) const;
    ProblemSpec with_a(CoefficientField a) const;

private:
    Mesh mesh_;
    NeumannOperator op_;
    CoefficientField a_;
    CoefficientField b_;
    double p_;
    double q_;
    double eps_;
    std::optional<double> gamma_decay_;
};

enum class IntegralSign { Nonnegative, Negative };
enum class Diagram { Figure1, Figure2 };

const char* to_string(IntegralSign s);
const char* to_string(Diagram d);

/// Which of the two bifurcation pictures the coefficients predict.
struct Regime {
    double int_a = 0.0;
    double int_b = 0.0;
    IntegralSign sign_int_a = IntegralSign::Nonnegative;
    bool H01 = false;  ///< {a > 0} meets {b > 0}
    bool H02 = false;  ///< {a > 0} is empty
    std::optional<bool> H2_ok;
    std::optional<double> c_star;
    Diagram predicted_diagram = Diagram::Figure1;
};

/// Regularized concave term g_eps(u) = (u + eps)^{q-2} u; for eps = 0 it is u^{q-1} (0 at u = 0).
double concave_term(double u, double q, double eps);
/// d/du g_eps(u) = (q-2)(u+eps)^{q-3} u + (u+eps)^{q-2}.
double concave_term_derivative(double u, double q, double eps);

/// f(u) = lambda b g_eps(u) + a u^{p-1}, nodewise.
Vector nonlinearity(const ProblemSpec& spec, double lambda, const Vector& u);

/// m(u) = lambda b g_eps'(u) + (p-1) a u^{p-2}: the diagonal weight of the linearization.
Vector linearization_weight(const ProblemSpec& spec, double lambda, const Vector& u);

/// R = A u - W f(u). Zero exactly at discrete solutions.
Vector residual(const ProblemSpec& spec, double lambda, const Vector& u);

/// dR/dlambda = -W (b * g_eps(u)).
Vector residual_lambda_derivative(const ProblemSpec& spec, const Vector& u);

/// J = A - W diag(m(u)). For eps = 0 requires u >= kUFloor.
SparseMatrix jacobian(const ProblemSpec& spec, double lambda, const Vector& u);

/// Scale-free residual ||W^{-1} R||_inf / (1 + ||u||_inf) used by all solver tolerances.
double scaled_residual_norm(const ProblemSpec& spec, const Vector& r, const Vector& u);

Regime classify_regime(const ProblemSpec& spec);

/// (int b / -int a)^{1/(p-q)}; throws DomainError when int a is not negative.
double c_star(const ProblemSpec& spec);

}  // namespace ccn
