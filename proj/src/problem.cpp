#include "ccn/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccn/errors.hpp"

namespace ccn {

namespace {

void require_field_on(const CoefficientField& f, const Mesh& mesh, const char* name) {
    if (static_cast<std::size_t>(f.samples.size()) != mesh.size())
        throw ConfigError(std::string("coefficient ") + name + " is not sampled on this mesh");
    if (!f.samples.allFinite()) throw ConfigError(std::string("coefficient ") + name + " has non-finite samples");
}

// odd extension below zero; only reachable for eps > 0 where the solver
// tolerates tiny negative transients
double convex_term(double u, double p) { return u >= 0.0 ? std::pow(u, p - 1.0) : -std::pow(-u, p - 1.0); }

double convex_term_derivative(double u, double p) { return (p - 1.0) * std::pow(std::abs(u), p - 2.0); }

void check_admissible(const ProblemSpec& spec, const Vector& u) {
    if (static_cast<std::size_t>(u.size()) != spec.size()) throw ContractError("state vector size mismatch");
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!std::isfinite(u[i])) throw DomainError("non-finite state at node " + std::to_string(i));
        if (spec.eps() == 0.0 && u[i] < 0.0)
            throw DomainError("negative state at node " + std::to_string(i) + " with eps = 0");
        if (spec.eps() > 0.0 && u[i] + spec.eps() <= 0.0)
            throw DomainError("u + eps <= 0 at node " + std::to_string(i));
    }
}

}  // namespace

ProblemSpec::ProblemSpec(Mesh mesh, CoefficientField a, CoefficientField b, double p, double q, double eps,
                         std::optional<double> gamma_decay)
    : mesh_(std::move(mesh)),
      op_(mesh_),
      a_(std::move(a)),
      b_(std::move(b)),
      p_(p),
      q_(q),
      eps_(eps),
      gamma_decay_(gamma_decay) {
    if (!(p_ > 2.0) || !std::isfinite(p_)) throw ConfigError("requires p > 2");
    if (!(q_ > 1.0 && q_ < 2.0)) throw ConfigError("requires 1 < q < 2");
    if (!(eps_ >= 0.0 && eps_ <= 1.0)) throw ConfigError("requires 0 <= eps <= 1");
    if (gamma_decay_ && !(*gamma_decay_ > 0.0)) throw ConfigError("requires gamma_decay > 0");
    require_field_on(a_, mesh_, "a");
    require_field_on(b_, mesh_, "b");
    if (b_.samples.minCoeff() < -kSignTol) throw ConfigError("requires b >= 0");
    if (!(b_.samples.maxCoeff() > kSignTol)) throw ConfigError("requires b not identically zero");
    if (!(a_.samples.cwiseAbs().maxCoeff() > kSignTol)) throw ConfigError("requires a not identically zero");
}

ProblemSpec ProblemSpec::from_text(const Mesh& mesh, const std::string& a, const std::string& b, double p, double q,
                                   double eps, std::optional<double> gamma_decay) {
    return ProblemSpec(mesh, sample_on_mesh(a, mesh), sample_on_mesh(b, mesh), p, q, eps, gamma_decay);
}

ProblemSpec ProblemSpec::with_eps(double eps) const {
    ProblemSpec s = *this;
    if (!(eps >= 0.0 && eps <= 1.0)) throw ConfigError("requires 0 <= eps <= 1");
    s.eps_ = eps;
    return s;
}

ProblemSpec ProblemSpec::with_a(CoefficientField a) const {
    return ProblemSpec(mesh_, std::move(a), b_, p_, q_, eps_, gamma_decay_);
}

const char* to_string(IntegralSign s) { return s == IntegralSign::Negative ? "negative" : "nonneg"; }
const char* to_string(Diagram d) { return d == Diagram::Figure1 ? "Figure1" : "Figure2"; }

double concave_term(double u, double q, double eps) {
    if (eps == 0.0) return u > 0.0 ? std::pow(u, q - 1.0) : 0.0;
    return std::pow(u + eps, q - 2.0) * u;
}

double concave_term_derivative(double u, double q, double eps) {
    if (eps == 0.0) return (q - 1.0) * std::pow(u, q - 2.0);
    const double s = u + eps;
    return (q - 2.0) * std::pow(s, q - 3.0) * u + std::pow(s, q - 2.0);
}

Vector nonlinearity(const ProblemSpec& spec, double lambda, const Vector& u) {
    check_admissible(spec, u);
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    Vector f(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        f[i] = lambda * b[i] * concave_term(u[i], spec.q(), spec.eps()) + a[i] * convex_term(u[i], spec.p());
    return f;
}

Vector linearization_weight(const ProblemSpec& spec, double lambda, const Vector& u) {
    check_admissible(spec, u);
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    Vector m(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (spec.eps() == 0.0 && u[i] < kUFloor)
            throw DomainError("linearization singular at node " + std::to_string(i) + " (u below floor with eps = 0)");
        m[i] = lambda * b[i] * concave_term_derivative(u[i], spec.q(), spec.eps()) +
               a[i] * convex_term_derivative(u[i], spec.p());
    }
    return m;
}

Vector residual(const ProblemSpec& spec, double lambda, const Vector& u) {
    const Vector f = nonlinearity(spec, lambda, u);
    return spec.stiffness() * u - spec.weights().cwiseProduct(f);
}

Vector residual_lambda_derivative(const ProblemSpec& spec, const Vector& u) {
    check_admissible(spec, u);
    const auto& b = spec.b().samples;
    Vector r(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        r[i] = -spec.weights()[i] * b[i] * concave_term(u[i], spec.q(), spec.eps());
    return r;
}

SparseMatrix jacobian(const ProblemSpec& spec, double lambda, const Vector& u) {
    const Vector m = linearization_weight(spec, lambda, u);
    SparseMatrix J = spec.stiffness();
    for (Eigen::Index i = 0; i < m.size(); ++i) J.coeffRef(i, i) -= spec.weights()[i] * m[i];
    return J;
}

double scaled_residual_norm(const ProblemSpec& spec, const Vector& r, const Vector& u) {
    return r.cwiseQuotient(spec.weights()).lpNorm<Eigen::Infinity>() / (1.0 + u.lpNorm<Eigen::Infinity>());
}

Regime classify_regime(const ProblemSpec& spec) {
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    Regime r;
    r.int_a = integrate(spec.mesh(), a);
    r.int_b = integrate(spec.mesh(), b);
    const double scale = std::max(1.0, integrate(spec.mesh(), a.cwiseAbs()));
    r.sign_int_a = r.int_a < -kSignTol * scale ? IntegralSign::Negative : IntegralSign::Nonnegative;

    bool any_a_pos = false;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a[i] > kSignTol) {
            any_a_pos = true;
            if (b[i] > kSignTol) r.H01 = true;
        }
    }
    r.H02 = !any_a_pos;

    if (spec.gamma_decay() && spec.mesh().dim() >= 2) {
        const double N = spec.mesh().dim();
        double bound = std::numeric_limits<double>::infinity();
        // the subcriticality restriction only applies for N > 2
        if (N > 2.0) bound = std::min(2.0 * N / (N - 2.0), (2.0 * N + *spec.gamma_decay()) / (N - 1.0));
        r.H2_ok = spec.p() < bound;
    }

    if (r.sign_int_a == IntegralSign::Negative) {
        r.c_star = std::pow(r.int_b / -r.int_a, 1.0 / (spec.p() - spec.q()));
        r.predicted_diagram = Diagram::Figure2;
    } else {
        r.predicted_diagram = Diagram::Figure1;
    }
    return r;
}

double c_star(const ProblemSpec& spec) {
    const Regime r = classify_regime(spec);
    if (!r.c_star) throw DomainError("c* requires int a < 0 (got " + std::to_string(r.int_a) + ")");
    return *r.c_star;
}

}  // namespace ccn
