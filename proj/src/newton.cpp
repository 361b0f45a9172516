#include <cmath>

#include "ccn/errors.hpp"
#include "ccn/solvers.hpp"

namespace ccn {

namespace {

constexpr int kMaxHalvings = 30;
constexpr double kConeSlack = 1e-12;

// For eps = 0 the trivial solution u = 0 attracts plain Newton from small starts
// (the tangent of u^{q-1} overshoots below zero). Dividing the residual by
// W u^{q-1} removes that zero while leaving the Newton step at solutions unchanged.
Vector residual_scale(const ProblemSpec& spec, const Vector& u) {
    if (spec.eps() > 0.0) return spec.weights();
    return spec.weights().cwiseProduct(u.array().pow(spec.q() - 1.0).matrix());
}

double merit(const ProblemSpec& spec, const Vector& r, const Vector& u) {
    return r.cwiseQuotient(residual_scale(spec, u)).norm();
}

Vector newton_step(const ProblemSpec& spec, double lambda, const Vector& u, const Vector& r) {
    SparseMatrix J = jacobian(spec, lambda, u);
    if (spec.eps() > 0.0) return solve_linear(J, Vector(-r));
    // d/du (D^{-1} R) = D^{-1} J - diag((q-1) G / u), with G = D^{-1} R
    const Vector D = residual_scale(spec, u);
    const Vector G = r.cwiseQuotient(D);
    J = D.cwiseInverse().asDiagonal() * J;
    for (Eigen::Index i = 0; i < u.size(); ++i) J.coeffRef(i, i) -= (spec.q() - 1.0) * G[i] / u[i];
    return solve_linear(J, Vector(-G));
}

}  // namespace

Solution newton_solve(const ProblemSpec& spec, double lambda, const Vector& u0, NewtonOptions opts) {
    if (!(opts.tol > 0.0)) throw ContractError("newton_solve requires tol > 0");
    if (opts.max_iter < 0) throw ContractError("newton_solve requires max_iter >= 0");
    if (static_cast<std::size_t>(u0.size()) != spec.size()) throw ContractError("newton_solve: initial guess size mismatch");

    const bool regularized = spec.eps() > 0.0;
    const double floor = regularized ? -kConeSlack : kUFloor;

    Vector u = u0;
    Vector r = residual(spec, lambda, u);
    double rn = scaled_residual_norm(spec, r, u);

    for (int k = 0;; ++k) {
        if (rn <= opts.tol) {
            Solution sol;
            sol.u = std::move(u);
            sol.lambda = lambda;
            sol.eps = spec.eps();
            sol.residual_norm = rn;
            sol.newton_iters = k;
            return sol;
        }
        if (k == opts.max_iter)
            throw NoConvergenceError("Newton did not converge in " + std::to_string(opts.max_iter) +
                                         " iterations (scaled residual " + std::to_string(rn) + ")",
                                     u);

        // The eps = 0 Jacobian is singular at u = 0; start from the floor instead.
        if (!regularized && u.minCoeff() < kUFloor) {
            u = u.cwiseMax(kUFloor);
            r = residual(spec, lambda, u);
        }

        const Vector du = newton_step(spec, lambda, u, r);

        double t = 1.0;
        int halvings = 0;
        while ((u + t * du).minCoeff() < floor) {
            t *= 0.5;
            if (++halvings > kMaxHalvings) {
                if (!regularized) throw DomainError("left positive cone");
                throw StagnationError("Newton step cannot stay admissible");
            }
        }

        const double phi0 = merit(spec, r, u);
        for (;;) {
            Vector trial = u + t * du;
            Vector rt = residual(spec, lambda, trial);
            const double rn_trial = scaled_residual_norm(spec, rt, trial);
            if (merit(spec, rt, trial) < phi0 || rn_trial <= opts.tol) {
                u = std::move(trial);
                r = std::move(rt);
                rn = rn_trial;
                break;
            }
            t *= 0.5;
            if (++halvings > kMaxHalvings)
                throw StagnationError("Newton line search failed (scaled residual " + std::to_string(rn) + ")");
        }
    }
}

}  // namespace ccn
