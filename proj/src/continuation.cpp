#include "ccn/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ccn/errors.hpp"

namespace ccn {

namespace {

constexpr int kCorrectorMaxIter = 12;
constexpr int kEasyIterations = 3;
constexpr double kFoldTol = 1e-8;

// [[J, col], [row^T, corner]]
SparseMatrix bordered(const SparseMatrix& J, const Vector& col, const Vector& row, double corner) {
    const Eigen::Index n = J.rows();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(J.nonZeros() + 2 * n + 1));
    for (Eigen::Index c = 0; c < J.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(J, c); it; ++it) trip.emplace_back(it.row(), it.col(), it.value());
    for (Eigen::Index i = 0; i < n; ++i) {
        if (col[i] != 0.0) trip.emplace_back(i, n, col[i]);
        if (row[i] != 0.0) trip.emplace_back(n, i, row[i]);
    }
    trip.emplace_back(n, n, corner);
    SparseMatrix B(n + 1, n + 1);
    B.setFromTriplets(trip.begin(), trip.end());
    return B;
}

double cone_floor(const ProblemSpec& spec) { return spec.eps() > 0.0 ? -1e-12 : kUFloor; }

struct Corrected {
    Solution sol;
    int iterations = 0;
};

// Newton on [R(u, lambda); <t, x - x_pred>] = 0 from the predictor.
std::optional<Corrected> correct(const ProblemSpec& spec, const Tangent& t, const Vector& u_pred, double l_pred,
                                 double tol) {
    const Vector& W = spec.weights();
    const Eigen::Index n = u_pred.size();
    const Vector row = W.cwiseProduct(t.du);
    const double floor = cone_floor(spec);
    Vector u = u_pred;
    double lambda = l_pred;
    try {
        for (int it = 0; it <= kCorrectorMaxIter; ++it) {
            const Vector R = residual(spec, lambda, u);
            const double c = row.dot(u - u_pred) + t.dlambda * (lambda - l_pred);
            const double rn = scaled_residual_norm(spec, R, u);
            if (it > 0 && rn <= tol && std::abs(c) <= 1e-12 * (1.0 + std::abs(lambda) + u.lpNorm<Eigen::Infinity>())) {
                Corrected out;
                out.sol.u = u;
                out.sol.lambda = lambda;
                out.sol.eps = spec.eps();
                out.sol.residual_norm = rn;
                out.sol.newton_iters = it;
                out.iterations = it;
                return out;
            }
            if (it == kCorrectorMaxIter) break;
            const SparseMatrix B = bordered(jacobian(spec, lambda, u), residual_lambda_derivative(spec, u), row, t.dlambda);
            Vector rhs(n + 1);
            rhs.head(n) = -R;
            rhs[n] = -c;
            const Vector z = solve_linear(B, rhs);
            double step = 1.0;
            int halvings = 0;
            while ((u + step * z.head(n)).minCoeff() < floor) {
                step *= 0.5;
                if (++halvings > 10) return std::nullopt;
            }
            u += step * z.head(n);
            lambda += step * z[n];
        }
    } catch (const SolverError&) {
    } catch (const DomainError&) {
    }
    return std::nullopt;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

BranchPoint make_point(const ProblemSpec& spec, Solution sol, const Tangent& reference, double s, bool gamma) {
    BranchPoint pt;
    pt.s = s;
    pt.tangent = compute_tangent(spec, sol, reference);
    pt.solution = std::move(sol);
    if (gamma) gamma1(spec, pt.solution);
    return pt;
}

}  // namespace

const char* to_string(BranchStatus s) {
    switch (s) {
        case BranchStatus::WindowExit: return "window_exit";
        case BranchStatus::FoldLimit: return "fold_limit";
        case BranchStatus::MaxPoints: return "max_points";
        case BranchStatus::Stagnated: return "stagnated";
    }
    return "?";
}

double arc_dot(const Vector& W, const Vector& u1, double l1, const Vector& u2, double l2) {
    return u1.cwiseProduct(W).dot(u2) + l1 * l2;
}

Tangent compute_tangent(const ProblemSpec& spec, const Solution& sol, const Tangent& reference) {
    const Vector& W = spec.weights();
    const Eigen::Index n = sol.u.size();
    const SparseMatrix B = bordered(jacobian(spec, sol.lambda, sol.u), residual_lambda_derivative(spec, sol.u),
                                    W.cwiseProduct(reference.du), reference.dlambda);
    Vector rhs = Vector::Zero(n + 1);
    rhs[n] = 1.0;
    const Vector z = solve_linear(B, rhs);
    Tangent t;
    t.du = z.head(n);
    t.dlambda = z[n];
    double norm = std::sqrt(arc_dot(W, t.du, t.dlambda, t.du, t.dlambda));
    if (arc_dot(W, t.du, t.dlambda, reference.du, reference.dlambda) < 0.0) norm = -norm;
    t.du /= norm;
    t.dlambda /= norm;
    return t;
}

BranchPoint start_from_zero(const ProblemSpec& spec, int dlambda_sign, double ds, double newton_tol) {
    if (!(spec.eps() > 0.0)) throw DomainError("start_from_zero requires eps > 0");
    if (!(ds > 0.0) || !std::isfinite(ds)) throw ContractError("start_from_zero requires ds > 0");
    if (dlambda_sign != 1 && dlambda_sign != -1) throw ContractError("start_from_zero requires dlambda_sign = +1 or -1");

    // Near (0, 0) the branch leaves along the constant mode, almost vertically.
    constexpr double beta = 0.05;
    const Vector& W = spec.weights();
    const double alpha = std::sqrt((1.0 - beta * beta) / W.sum());
    Tangent t;
    t.du = Vector::Constant(W.size(), alpha);
    t.dlambda = dlambda_sign * beta;

    auto corrected = correct(spec, t, Vector(ds * t.du), ds * t.dlambda, newton_tol);
    if (!corrected || !(corrected->sol.u.minCoeff() > 0.0))
        throw ContinuationError("start from the trivial line failed; try a smaller ds");

    BranchPoint pt;
    pt.s = 0.0;
    pt.tangent = compute_tangent(spec, corrected->sol, t);
    if (pt.tangent.du.dot(W) < 0.0) {
        pt.tangent.du = -pt.tangent.du;
        pt.tangent.dlambda = -pt.tangent.dlambda;
    }
    pt.solution = std::move(corrected->sol);
    return pt;
}

Solution minimal_solution_near_zero(const ProblemSpec& spec, double lambda, double newton_tol) {
    if (!(lambda > 0.0)) throw DomainError("minimal-branch start requires lambda > 0");
    if (spec.eps() != 0.0) throw DomainError("minimal-branch start requires eps = 0");
    const double c = c_star(spec);
    const Vector u0 = Vector::Constant(static_cast<Eigen::Index>(spec.size()), c * std::pow(lambda, 1.0 / (spec.p() - spec.q())));
    Solution sol;
    try {
        sol = newton_solve(spec, lambda, u0, {newton_tol, 50});
    } catch (const SolverError& e) {
        throw SolverError(std::string("minimal-branch start failed (") + e.what() + "); try a smaller lambda");
    }
    gamma1(spec, sol);
    if (!(*sol.gamma1 > 0.0)) throw SolverError("minimal-branch start converged to an unstable solution; try a smaller lambda");
    return sol;
}

Solution start_from_asymptotic(const ProblemSpec& spec, double lambda_small, double newton_tol) {
    if (!(lambda_small > 0.0 && lambda_small <= 0.1))
        throw DomainError("start_from_asymptotic requires 0 < lambda_small <= 0.1");
    return minimal_solution_near_zero(spec, lambda_small, newton_tol);
}

Branch trace_branch(const ProblemSpec& spec, const Solution& start, const TraceOptions& opts, int direction) {
    if (direction != 1 && direction != -1) throw ContractError("trace_branch: direction must be +1 or -1");
    Tangent reference;
    reference.du = Vector::Zero(start.u.size());
    reference.dlambda = direction;
    BranchPoint pt;
    pt.tangent = compute_tangent(spec, start, reference);
    pt.solution = start;
    return trace_branch(spec, pt, opts);
}

Branch trace_branch(const ProblemSpec& spec, const BranchPoint& start, const TraceOptions& opts) {
    if (!(opts.ds > 0.0) || !std::isfinite(opts.ds)) throw ContractError("trace_branch requires ds > 0");
    if (opts.max_points < 1) throw ContractError("trace_branch requires max_points >= 1");
    if (static_cast<std::size_t>(start.solution.u.size()) != spec.size()) throw ContractError("trace_branch: size mismatch");

    Branch br;
    br.eps = spec.eps();
    if (!opts.window.contains(start.solution.lambda)) {
        br.status = BranchStatus::WindowExit;
        return br;
    }

    BranchPoint first = start;
    if (opts.compute_gamma1 && !first.solution.gamma1) gamma1(spec, first.solution);
    br.points.push_back(std::move(first));

    const Vector& W = spec.weights();
    const double ds_min = opts.ds / 32.0;
    const double ds_max = 4.0 * opts.ds;
    double ds = opts.ds;
    int easy = 0;
    br.status = BranchStatus::MaxPoints;

    while (static_cast<int>(br.points.size()) < opts.max_points) {
        const BranchPoint& cur = br.points.back();
        const Vector u_pred = cur.solution.u + ds * cur.tangent.du;
        const double l_pred = cur.solution.lambda + ds * cur.tangent.dlambda;
        auto corrected = correct(spec, cur.tangent, u_pred, l_pred, opts.newton_tol);

        bool ok = corrected.has_value();
        if (ok) {
            const Vector du = corrected->sol.u - cur.solution.u;
            const double dl = corrected->sol.lambda - cur.solution.lambda;
            ok = std::sqrt(arc_dot(W, du, dl, du, dl)) <= 2.0 * ds;
        }
        if (!ok) {
            ++br.corrector_failures;
            easy = 0;
            ds *= 0.5;
            if (ds < ds_min) {
                if (br.points.size() == 1) throw ContinuationError("corrector failed immediately at the start point");
                br.status = BranchStatus::Stagnated;
                break;
            }
            continue;
        }
        if (!opts.window.contains(corrected->sol.lambda)) {
            br.status = BranchStatus::WindowExit;
            break;
        }

        BranchPoint next;
        try {
            next = make_point(spec, std::move(corrected->sol), cur.tangent, cur.s + ds, opts.compute_gamma1);
        } catch (const SolverError&) {
            ++br.corrector_failures;
            ds *= 0.5;
            if (ds < ds_min) {
                br.status = BranchStatus::Stagnated;
                break;
            }
            continue;
        }

        const std::size_t k = br.points.size() - 1;
        if (sign_of(cur.tangent.dlambda) * sign_of(next.tangent.dlambda) < 0.0) {
            br.points[k].is_fold = true;
            br.folds.push_back(k);
        }
        br.points.push_back(std::move(next));

        if (corrected->iterations <= kEasyIterations) {
            if (++easy >= 3) {
                ds = std::min(ds * 1.3, ds_max);
                easy = 0;
            }
        } else {
            easy = 0;
        }
        if (opts.max_folds && static_cast<int>(br.folds.size()) >= *opts.max_folds) {
            br.status = BranchStatus::FoldLimit;
            break;
        }
    }

    if (opts.refine_fold && !br.folds.empty()) {
        const std::size_t k = br.folds.front();
        try {
            br.lambda0_estimate = locate_fold(spec, br, k, opts.newton_tol).lambda0;
        } catch (const Error&) {
            br.lambda0_estimate = std::max(br.points[k].solution.lambda, br.points[k + 1].solution.lambda);
        }
    }
    return br;
}

FoldResult locate_fold(const ProblemSpec& spec, const Branch& branch, std::size_t index, double newton_tol) {
    if (std::find(branch.folds.begin(), branch.folds.end(), index) == branch.folds.end() ||
        index + 1 >= branch.points.size())
        throw ContractError("locate_fold: no fold flagged at index " + std::to_string(index));

    const Vector& W = spec.weights();
    const BranchPoint& p0 = branch.points[index];
    const BranchPoint& p1 = branch.points[index + 1];
    const Tangent& t0 = p0.tangent;
    const double sigma_hi = arc_dot(W, t0.du, t0.dlambda, p1.solution.u - p0.solution.u,
                                    p1.solution.lambda - p0.solution.lambda);
    if (!(sigma_hi > 0.0)) throw ContinuationError("fold refinement: degenerate bracket");

    struct Trial {
        Solution sol;
        Tangent t;
    };
    const auto evaluate_at = [&](double sigma) -> Trial {
        auto c = correct(spec, t0, Vector(p0.solution.u + sigma * t0.du), p0.solution.lambda + sigma * t0.dlambda,
                         newton_tol);
        if (!c) throw ContinuationError("fold refinement: corrector failed inside the bracket");
        Trial tr{std::move(c->sol), {}};
        tr.t = compute_tangent(spec, tr.sol, t0);
        return tr;
    };

    double lo = 0.0;
    double hi = sigma_hi;
    const double s_lo = sign_of(t0.dlambda);
    Trial best = evaluate_at(hi);
    if (sign_of(best.t.dlambda) == s_lo) throw ContinuationError("fold refinement: bracket lost");

    FoldResult res;
    for (int it = 1; it <= 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        Trial tr = evaluate_at(mid);
        res.bisections = it;
        const bool same_side = sign_of(tr.t.dlambda) == s_lo;
        if (std::abs(tr.t.dlambda) < std::abs(best.t.dlambda)) best = tr;
        if (std::abs(tr.t.dlambda) <= kFoldTol) break;
        (same_side ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * sigma_hi) break;
    }
    if (std::abs(best.t.dlambda) > kFoldTol) throw ContinuationError("fold refinement: bracket lost before |dlambda| <= 1e-8");

    res.lambda0 = best.sol.lambda;
    res.dlambda = best.t.dlambda;
    res.solution = std::move(best.sol);
    res.gamma1 = gamma1(spec, res.solution);
    return res;
}

}  // namespace ccn
