#include "ccn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccn/errors.hpp"

namespace ccn {

namespace {

bool is_constant(const Vector& u) {
    const double mean = u.mean();
    return (u.array() - mean).abs().maxCoeff() <= 1e-8 * u.lpNorm<Eigen::Infinity>();
}

std::string node_text(Eigen::Index i) { return "node " + std::to_string(i); }

}  // namespace

double nonexistence_identity(const ProblemSpec& spec, double lambda, const Solution& solution) {
    const Vector& u = solution.u;
    if (static_cast<std::size_t>(u.size()) != spec.size()) throw ContractError("nonexistence_identity: size mismatch");
    if (!(u.minCoeff() > kUFloor)) throw DomainError("nonexistence_identity requires a positive solution");
    if (is_constant(u)) throw InapplicableError("nonexistence_identity requires a nonconstant solution");

    const auto& b = spec.b().samples;
    Vector integrand(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i)
        integrand[i] = b[i] * std::pow(u[i] + spec.eps(), spec.q() - 2.0) * std::pow(u[i], 2.0 - spec.p());
    return integrate(spec.mesh(), spec.a().samples) + lambda * integrate(spec.mesh(), integrand);
}

double positivity_floor(const ProblemSpec& spec, double Lambda, const Solution& solution) {
    if (!(Lambda > 0.0)) throw DomainError("positivity_floor requires Lambda > 0");
    if (!(solution.lambda >= Lambda)) throw DomainError("positivity_floor requires lambda >= Lambda");
    if (!(solution.u.minCoeff() > 0.0)) throw DomainError("positivity_floor requires a positive solution");
    const EigenResult phi = sigma_lambda(spec.mesh(), spec.b(), Lambda);
    const double c = solution.u.cwiseQuotient(phi.vector).minCoeff();
    if (!(c > 0.0)) throw DomainError("positivity_floor: non-positive ratio");
    return c;
}

FloorScan lower_bound_scan(const Branch& branch, double Lambda) {
    FloorScan scan;
    scan.delta0 = std::numeric_limits<double>::infinity();
    for (const auto& pt : branch.points) {
        if (pt.solution.lambda <= -Lambda) {
            ++scan.selected;
            scan.delta0 = std::min(scan.delta0, pt.solution.u.maxCoeff());
        }
    }
    return scan;
}

double certificate_constant(double C1, double Lambda, double max_b, double max_w0, double q) {
    const double inv = 1.0 / (2.0 - q);
    const double second = std::pow(Lambda * max_b, inv) * std::pow(1.0 + max_w0, (q - 1.0) * inv);
    return std::max(C1, second);
}

std::vector<bool> negative_set(const ProblemSpec& spec) {
    const auto& a = spec.a().samples;
    std::vector<bool> mask(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) mask[static_cast<std::size_t>(i)] = a[i] < -kSignTol;
    return mask;
}

BoundCertificate build_supersolution(const ProblemSpec& spec, double Lambda, double C1, const std::vector<bool>& mask) {
    if (mask.size() != spec.size()) throw ContractError("build_supersolution: mask size mismatch");
    if (!(Lambda >= 0.0)) throw DomainError("build_supersolution requires Lambda >= 0");
    if (!(C1 >= 0.0)) throw DomainError("build_supersolution requires C1 >= 0");
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i] && !(a[static_cast<Eigen::Index>(i)] < 0.0))
            throw DomainError("build_supersolution requires a < 0 on the mask (" + node_text(static_cast<Eigen::Index>(i)) + ")");

    const DirichletOperator dir(spec.op(), mask);  // validates the mask
    BoundCertificate cert;
    cert.lambda_window = Lambda;
    cert.C1 = C1;
    cert.w0 = solve_dirichlet_poisson(spec.mesh(), mask, Vector::Ones(static_cast<Eigen::Index>(spec.size())));

    std::vector<std::size_t> closure = dir.active();
    closure.insert(closure.end(), dir.boundary().begin(), dir.boundary().end());
    for (std::size_t i : closure) {
        cert.max_b = std::max(cert.max_b, b[static_cast<Eigen::Index>(i)]);
        cert.max_w0 = std::max(cert.max_w0, cert.w0[static_cast<Eigen::Index>(i)]);
    }
    cert.C = certificate_constant(C1, Lambda, cert.max_b, cert.max_w0, spec.q());
    cert.w1 = cert.C * (Vector::Ones(cert.w0.size()) + cert.w0);

    const Vector lap = spec.op().apply_laplacian(cert.w1);
    const double q = spec.q();
    const double p = spec.p();
    cert.worst_margin = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, Lambda}) {
        for (double eps : {0.0, 1.0}) {
            for (std::size_t i : dir.active()) {
                const auto k = static_cast<Eigen::Index>(i);
                const double w = cert.w1[k];
                const double margin = lap[k] + std::max(-a[k], 0.0) * std::pow(w, p - 1.0) -
                                      lambda * b[k] * std::pow(w + eps, q - 2.0) * w;
                cert.worst_margin = std::min(cert.worst_margin, margin);
                if (margin < -1e-10)
                    throw CertificateError("supersolution inequality fails at " + node_text(k) + " (lambda = " +
                                           std::to_string(lambda) + ", eps = " + std::to_string(eps) +
                                           ", margin = " + std::to_string(margin) + ")");
            }
        }
    }
    return cert;
}

ComparisonResult comparison_check(const ComparisonProblem& problem, const Vector& u, const Vector& v) {
    if (!problem.mesh) throw ContractError("comparison_check: no mesh");
    const Mesh& mesh = *problem.mesh;
    const auto n = static_cast<Eigen::Index>(mesh.size());
    if (u.size() != n || v.size() != n || problem.dirichlet_mask.size() != mesh.size())
        throw ContractError("comparison_check: shape mismatch");
    if (!problem.f) throw ContractError("comparison_check: reaction f missing");
    if (!(problem.C1 >= 0.0)) throw ContractError("comparison_check requires C1 >= 0");
    if (u.minCoeff() < 0.0 || v.minCoeff() < 0.0) throw DomainError("comparison_check requires u, v >= 0");
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (problem.dirichlet_mask[i] && !mesh.on_boundary(i))
            throw ContractError("comparison_check: Gamma_0 must consist of boundary nodes");
        if (!mesh.on_boundary(i) && !(v[static_cast<Eigen::Index>(i)] > 0.0))
            throw DomainError("comparison_check requires v > 0 at interior " + node_text(static_cast<Eigen::Index>(i)));
    }

    const NeumannOperator op(mesh);
    const Vector& W = mesh.weights();

    // r_i = <grad z, grad e_i> - int f(z) e_i - int_{Gamma_1} g(z) e_i
    const auto weak_residual = [&](const Vector& z, double& scale) {
        const Vector Az = op.stiffness() * z;
        Vector r(n);
        scale = 1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto node = static_cast<std::size_t>(i);
            const double fi = W[i] * problem.f(node, z[i]);
            const double gi = problem.g ? mesh.boundary_weight(node) * problem.g(node, z[i]) : 0.0;
            r[i] = Az[i] - fi - gi;
            scale = std::max(scale, std::abs(Az[i]) + std::abs(fi) + std::abs(gi));
        }
        return r;
    };

    ComparisonResult res;
    res.max_violation = std::max(0.0, (u - v).maxCoeff());

    double su = 0.0;
    double sv = 0.0;
    const Vector ru = weak_residual(u, su);
    const Vector rv = weak_residual(v, sv);
    for (Eigen::Index i = 0; i < n && res.failing.empty(); ++i) {
        const auto node = static_cast<std::size_t>(i);
        if (problem.dirichlet_mask[node]) {
            if (u[i] > problem.C1 + 1e-9) res.failing = "boundary order: u > C1 on Gamma_0 at " + node_text(i);
            else if (v[i] < problem.C1 - 1e-9) res.failing = "boundary order: v < C1 on Gamma_0 at " + node_text(i);
            continue;
        }
        if (ru[i] > 1e-9 * su) res.failing = "u is not a subsolution at " + node_text(i);
        else if (rv[i] < -1e-9 * sv) res.failing = "v is not a supersolution at " + node_text(i);
    }
    if (res.failing.empty() && res.max_violation > 1e-9) {
        Eigen::Index worst = 0;
        (u - v).maxCoeff(&worst);
        res.failing = "conclusion u <= v fails at " + node_text(worst);
    }
    res.verdict = res.failing.empty();
    return res;
}

AsymptoticTable asymptotic_check(const ProblemSpec& spec, const std::vector<double>& lambda_list, double newton_tol) {
    if (lambda_list.size() < 3) throw ConfigError("asymptotic_check needs at least three lambda values");
    for (std::size_t i = 0; i < lambda_list.size(); ++i) {
        if (!(lambda_list[i] > 0.0 && lambda_list[i] <= 0.2)) throw ConfigError("asymptotic_check: lambda values must lie in (0, 0.2]");
        if (i > 0 && !(lambda_list[i] < lambda_list[i - 1])) throw ConfigError("asymptotic_check: lambda list must be strictly decreasing");
    }

    AsymptoticTable table;
    table.c_star = c_star(spec);
    const double expo = 1.0 / (spec.p() - spec.q());
    const auto& a = spec.a().samples;
    const auto& b = spec.b().samples;
    const bool has_constant_super = a.maxCoeff() < 0.0;

    bool all_ok = true;
    for (double lambda : lambda_list) {
        AsymptoticRow row;
        row.lambda = lambda;
        try {
            row.solution = minimal_solution_near_zero(spec, lambda, newton_tol);
            const Vector& u = row.solution.u;
            row.u_max = u.maxCoeff();
            row.e = (std::pow(lambda, -expo) * u.array() - table.c_star).abs().maxCoeff();
            if (has_constant_super) {
                double level = 0.0;
                for (Eigen::Index i = 0; i < a.size(); ++i) level = std::max(level, std::pow(lambda * b[i] / -a[i], expo));
                const Solution down = monotone_iterate(spec, lambda, Vector::Constant(u.size(), level), Direction::Down);
                row.cross_check = (down.u - u).lpNorm<Eigen::Infinity>();
            }
            if (!table.rows.empty() && !table.rows.back().error)
                row.below_previous = (table.rows.back().solution.u - u).minCoeff() > 0.0;
        } catch (const Error& e) {
            row.error = e.what();
            all_ok = false;
        }
        table.rows.push_back(std::move(row));
    }

    table.e_decreasing = all_ok;
    table.monotone_in_lambda = all_ok;
    for (std::size_t i = 1; all_ok && i < table.rows.size(); ++i) {
        if (!(table.rows[i].e < table.rows[i - 1].e)) table.e_decreasing = false;
        if (!table.rows[i].below_previous.value_or(false)) table.monotone_in_lambda = false;
    }
    return table;
}

FigureOneAudit audit_figure_one(const Branch& branch) {
    FigureOneAudit audit;
    for (const auto& pt : branch.points) {
        ++audit.points;
        if (pt.solution.lambda >= 0.0) ++audit.lambda_violations;
        if (pt.solution.gamma1 && *pt.solution.gamma1 >= 0.0 && pt.solution.u.minCoeff() > 0.0 &&
            !is_constant(pt.solution.u))
            ++audit.stable_nonconstant;
    }
    return audit;
}

}  // namespace ccn
