#include <algorithm>
#include <cmath>

#include "ccn/errors.hpp"
#include "ccn/solvers.hpp"

namespace ccn {

namespace {

constexpr double kMonotoneSlack = 1e-10;

// Level of the largest constant supersolution when a < 0 everywhere, else 0.
double constant_supersolution_level(const ProblemSpec& spec, double lambda) {
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    if (!(a.maxCoeff() < 0.0)) return 0.0;
    double c = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        c = std::max(c, std::pow(lambda * b[i] / -a[i], 1.0 / (spec.p() - spec.q())));
    return c;
}

}  // namespace

double default_omega(const ProblemSpec& spec, double lambda, const Vector& u0, double upper_bound) {
    const double u_min = std::max(u0.minCoeff(), kUFloor);
    const double max_a = spec.a().samples.cwiseAbs().maxCoeff();
    const double max_b = spec.b().samples.maxCoeff();
    return 1.0 + (spec.p() - 1.0) * max_a * std::pow(upper_bound, spec.p() - 2.0) +
           (2.0 - spec.q()) * lambda * max_b * std::pow(u_min, spec.q() - 2.0);
}

Solution monotone_iterate(const ProblemSpec& spec, double lambda, const Vector& u0, Direction direction,
                          MonotoneOptions opts) {
    if (!(lambda > 0.0)) throw DomainError("monotone_iterate requires lambda > 0");
    if (spec.eps() != 0.0) throw DomainError("monotone_iterate requires eps = 0");
    if (static_cast<std::size_t>(u0.size()) != spec.size()) throw ContractError("monotone_iterate: size mismatch");
    if (!(u0.minCoeff() >= 0.0)) throw DomainError("monotone_iterate requires u0 >= 0");
    if (!(opts.tol > 0.0) || opts.cap < 1) throw ContractError("monotone_iterate: bad tolerance or cap");

    const double upper = opts.upper_bound.value_or(std::max(u0.maxCoeff(), constant_supersolution_level(spec, lambda)));
    const double omega = opts.omega.value_or(default_omega(spec, lambda, u0, upper));
    if (!(omega > 0.0)) throw ContractError("monotone_iterate requires omega > 0");

    const Vector& W = spec.weights();
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    SparseMatrix M = spec.stiffness();
    for (Eigen::Index i = 0; i < W.size(); ++i) M.coeffRef(i, i) += omega * W[i];
    const SparseFactorization resolvent(M);

    Vector u = u0;
    Vector F(u.size());
    for (int k = 1; k <= opts.cap; ++k) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
            F[i] = omega * u[i] + a[i] * std::pow(u[i], spec.p() - 1.0) +
                   lambda * b[i] * concave_term(u[i], spec.q(), 0.0);
        Vector next = resolvent.solve(Vector(W.cwiseProduct(F))).cwiseMax(0.0);
        const Vector step = next - u;
        const double slack = kMonotoneSlack * std::max(1.0, u.lpNorm<Eigen::Infinity>());
        const double violation = direction == Direction::Up ? -step.minCoeff() : step.maxCoeff();
        if (violation > slack)
            throw MonotonicityError("monotone iteration moved against its direction by " + std::to_string(violation) +
                                    " at sweep " + std::to_string(k));
        u = std::move(next);
        if (step.lpNorm<Eigen::Infinity>() <= opts.tol) {
            Solution sol;
            sol.u = u;
            sol.lambda = lambda;
            sol.eps = 0.0;
            sol.residual_norm = scaled_residual_norm(spec, residual(spec, lambda, u), u);
            sol.newton_iters = k;
            return sol;
        }
    }
    throw NoConvergenceError("monotone iteration did not converge in " + std::to_string(opts.cap) + " sweeps", u);
}

}  // namespace ccn
