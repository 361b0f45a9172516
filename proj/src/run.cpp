#include "ccn/run.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ccn/errors.hpp"
#include "ccn/export.hpp"
#include "ccn/verify.hpp"

namespace ccn {

namespace {

using nlohmann::json;

// JSON has no infinities; non-finite values become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_number(const std::optional<T>& v) {
    return v ? number(static_cast<double>(*v)) : json(nullptr);
}

json plan_json(const RunPlan& plan) {
    json j;
    j["command"] = to_string(plan.command);
    j["dim"] = plan.domain.dim;
    j["bounds"] = plan.domain.dim == 1 ? json::array({plan.domain.lo[0], plan.domain.hi[0]})
                                       : json::array({plan.domain.lo[0], plan.domain.hi[0], plan.domain.lo[1], plan.domain.hi[1]});
    j["n"] = plan.n;
    j["p"] = plan.p;
    j["q"] = plan.q;
    j["a"] = plan.a;
    j["b"] = plan.b;
    j["eps"] = plan.eps;
    if (!plan.eps_schedule.empty()) j["eps_schedule"] = plan.eps_schedule;
    j["gamma_decay"] = optional_number(plan.gamma_decay);
    j["lambda"] = optional_number(plan.lambda);
    if (plan.lambda_window)
        j["lambda_window"] = {{"lo", plan.lambda_window->lo}, {"hi", plan.lambda_window->hi},
                              {"lo_closed", plan.lambda_window->lo_closed}, {"hi_closed", plan.lambda_window->hi_closed}};
    j["ds"] = plan.ds;
    j["max_points"] = plan.max_points;
    j["newton_tol"] = plan.newton_tol;
    j["deterministic"] = true;
    return j;
}

json regime_json(const Regime& r) {
    json j;
    j["int_a"] = r.int_a;
    j["int_b"] = r.int_b;
    j["sign_int_a"] = to_string(r.sign_int_a);
    j["H01"] = r.H01;
    j["H02"] = r.H02;
    j["H1"] = "asserted by user";
    j["H2_ok"] = r.H2_ok ? json(*r.H2_ok) : json(nullptr);
    j["c_star"] = optional_number(r.c_star);
    j["predicted_diagram"] = to_string(r.predicted_diagram);
    return j;
}

json branch_json(const Branch& br) {
    json j;
    j["eps"] = br.eps;
    j["points"] = br.points.size();
    j["folds"] = br.folds;
    j["status"] = to_string(br.status);
    j["corrector_failures"] = br.corrector_failures;
    j["lambda0_estimate"] = optional_number(br.lambda0_estimate);
    if (!br.points.empty()) {
        double lmin = std::numeric_limits<double>::infinity(), lmax = -lmin, umax = 0.0;
        for (const auto& pt : br.points) {
            lmin = std::min(lmin, pt.solution.lambda);
            lmax = std::max(lmax, pt.solution.lambda);
            umax = std::max(umax, pt.solution.u.lpNorm<Eigen::Infinity>());
        }
        j["lambda_min"] = lmin;
        j["lambda_max"] = lmax;
        j["u_max"] = umax;
    }
    return j;
}

json solution_json(const Solution& s) {
    json j;
    j["lambda"] = s.lambda;
    j["eps"] = s.eps;
    j["u_max"] = s.u.maxCoeff();
    j["u_min"] = s.u.minCoeff();
    j["residual_norm"] = s.residual_norm;
    j["newton_iters"] = s.newton_iters;
    j["gamma1"] = optional_number(s.gamma1);
    j["stability"] = s.stability ? json(to_string(*s.stability)) : json(nullptr);
    return j;
}

std::string csv_text(const Branch& br, const Vector& W) {
    std::ostringstream o;
    write_branch_csv(o, br, W);
    return o.str();
}

void export_branch(const RunPlan& plan, const Branch& br, const Mesh& mesh, const std::vector<SvgSeries>& series,
                   const std::string& title) {
    if (plan.out_csv) {
        write_text_file(*plan.out_csv, csv_text(br, mesh.weights()));
        if (plan.dump_solutions) {
            std::ostringstream o;
            write_nodes_csv(o, br, mesh);
            std::filesystem::path side = *plan.out_csv;
            side.replace_extension(".nodes.csv");
            write_text_file(side, o.str());
        }
    }
    if (plan.out_svg) write_text_file(*plan.out_svg, render_svg(series, title));
}

int sign_toward(const LambdaWindow& w) { return w.hi > 0.0 ? +1 : -1; }

TraceOptions trace_options(const RunPlan& plan) {
    TraceOptions t;
    t.ds = plan.ds;
    t.window = *plan.lambda_window;
    t.max_points = plan.max_points;
    t.newton_tol = plan.newton_tol;
    return t;
}

Branch trace_for_plan(const RunPlan& plan, const ProblemSpec& spec, const Regime& regime) {
    const TraceOptions opts = trace_options(plan);
    if (spec.eps() > 0.0) {
        const BranchPoint start = start_from_zero(spec, sign_toward(opts.window), plan.ds, plan.newton_tol);
        return trace_branch(spec, start, opts);
    }
    if (!regime.c_star) throw ConfigError("eps = 0 branches start on the minimal branch, which requires int a < 0");
    const Solution start = start_from_asymptotic(spec, plan.lambda.value_or(0.01), plan.newton_tol);
    return trace_branch(spec, start, opts, +1);
}

// Nonexistence identity on every nonconstant positive point; returns the number of violations.
json identity_audit(const ProblemSpec& spec, const Branch& br, int& violations) {
    std::size_t checked = 0;
    double worst = -std::numeric_limits<double>::infinity();
    violations = 0;
    for (const auto& pt : br.points) {
        try {
            const double I = nonexistence_identity(spec, pt.solution.lambda, pt.solution);
            ++checked;
            worst = std::max(worst, I);
            if (!(I < 0.0)) ++violations;
        } catch (const InapplicableError&) {
        } catch (const DomainError&) {
        }
    }
    return {{"checked", checked}, {"max_value", number(worst)}, {"violations", violations}};
}

void run_classify(const RunPlan& plan, RunOutcome& out) {
    const ProblemSpec spec = plan.spec();
    out.summary["regime"] = regime_json(classify_regime(spec));
}

void run_eigen(const RunPlan& plan, RunOutcome& out) {
    const Mesh mesh = plan.mesh();
    const CoefficientField b = sample_on_mesh(plan.b, mesh);
    const double lambda = *plan.lambda;
    const EigenResult principal = plan.eps > 0.0 ? sigma_eps(mesh, b, lambda, plan.eps, plan.q)
                                                 : sigma_lambda(mesh, b, lambda);
    const NeumannOperator op(mesh);
    const EigenResult second = second_eigenpair(op.stiffness(), Vector::Zero(mesh.weights().size()), mesh.weights());
    out.summary["eigen"] = {{"problem", plan.eps > 0.0 ? "sigma_eps" : "sigma_lambda"},
                            {"lambda", lambda},
                            {"sigma", principal.value},
                            {"iterations", principal.iterations},
                            {"phi_min", principal.vector.minCoeff()},
                            {"second_neumann_eigenvalue", second.value}};
}

void run_solve(const RunPlan& plan, RunOutcome& out) {
    const ProblemSpec spec = plan.spec();
    const Regime regime = classify_regime(spec);
    out.summary["regime"] = regime_json(regime);
    const double lambda = *plan.lambda;
    const double level = regime.c_star && lambda > 0.0 ? *regime.c_star * std::pow(lambda, 1.0 / (spec.p() - spec.q())) : 1.0;
    Solution sol = newton_solve(spec, lambda, Vector::Constant(static_cast<Eigen::Index>(spec.size()), level),
                                {plan.newton_tol, 50});
    try {
        gamma1(spec, sol);
    } catch (const DomainError&) {
    }
    out.summary["solution"] = solution_json(sol);

    Branch br;
    br.eps = spec.eps();
    BranchPoint pt;
    pt.solution = sol;
    br.points.push_back(pt);
    export_branch(plan, br, spec.mesh(), {{&br, 1.0, ""}}, "solve");
}

void run_branch(const RunPlan& plan, const RunHooks& hooks, RunOutcome& out) {
    const ProblemSpec spec = plan.spec();
    const Regime regime = classify_regime(spec);
    out.summary["regime"] = regime_json(regime);
    Branch br = trace_for_plan(plan, spec, regime);
    if (hooks.after_trace) hooks.after_trace(br);
    out.summary["branch"] = branch_json(br);

    json verification;
    if (regime.predicted_diagram == Diagram::Figure1) {
        const FigureOneAudit audit = audit_figure_one(br);
        verification["figure1_lambda_law"] = audit.lambda_violations == 0;
        verification["figure1_lambda_violations"] = audit.lambda_violations;
        verification["figure1_stable_nonconstant"] = audit.stable_nonconstant;
        if (audit.lambda_violations) out.exit_code = kExitVerification;
    }
    out.summary["verification"] = verification;
    export_branch(plan, br, spec.mesh(), {{&br, 1.0, ""}}, std::string("branch, eps = ") + format_double(spec.eps()));
}

void run_verify(const RunPlan& plan, const RunHooks& hooks, RunOutcome& out) {
    const ProblemSpec spec = plan.spec();
    const Regime regime = classify_regime(spec);
    out.summary["regime"] = regime_json(regime);
    Branch br = trace_for_plan(plan, spec, regime);
    if (hooks.after_trace) hooks.after_trace(br);
    out.summary["branch"] = branch_json(br);

    json v;
    bool ok = true;

    int violations = 0;
    v["nonexistence_identity"] = identity_audit(spec, br, violations);
    ok = ok && violations == 0;

    if (regime.predicted_diagram == Diagram::Figure1) {
        const FigureOneAudit audit = audit_figure_one(br);
        v["figure1_lambda_law"] = audit.lambda_violations == 0;
        v["figure1_stable_nonconstant"] = audit.stable_nonconstant;
        ok = ok && audit.lambda_violations == 0;
    }

    const FloorScan scan = lower_bound_scan(br, 0.5);
    v["delta0"] = {{"Lambda", 0.5}, {"value", number(scan.delta0)}, {"selected", scan.selected}};
    if (!scan.selected) v["delta0"]["warning"] = "no branch point with lambda <= -Lambda";

    const std::vector<bool> mask = negative_set(spec);
    const double Lambda = plan.lambda.value_or(std::max(std::abs(plan.lambda_window->lo), std::abs(plan.lambda_window->hi)));
    if (Lambda > 0.0 && std::count(mask.begin(), mask.end(), true) > 0 &&
        std::count(mask.begin(), mask.end(), false) > 0) {
        double C1 = 0.0;
        for (const auto& pt : br.points)
            if (std::abs(pt.solution.lambda) <= Lambda)
                for (std::size_t i = 0; i < mask.size(); ++i)
                    if (!mask[i]) C1 = std::max(C1, pt.solution.u[static_cast<Eigen::Index>(i)]);
        const BoundCertificate cert = build_supersolution(spec, Lambda, C1, mask);
        const double ceiling = cert.w1.maxCoeff();
        std::size_t above = 0;
        for (const auto& pt : br.points)
            if (std::abs(pt.solution.lambda) <= Lambda && pt.solution.u.maxCoeff() > ceiling) ++above;
        v["certificate"] = {{"C", cert.C},   {"C1", cert.C1},          {"Lambda", Lambda},
                            {"max_w0", cert.max_w0}, {"max_w1", ceiling}, {"points_above_ceiling", above}};
        ok = ok && above == 0;
    } else {
        v["certificate"] = "not applicable";
    }

    if (regime.c_star) {
        // the minimal branch ends at the fold, so the list stays well below it
        double top = 0.2;
        if (br.lambda0_estimate) top = std::min(top, 0.5 * *br.lambda0_estimate);
        const AsymptoticTable table =
            asymptotic_check(spec.with_eps(0.0), {top, top / 2, top / 4, top / 8}, plan.newton_tol);
        json rows = json::array();
        for (const auto& r : table.rows)
            rows.push_back({{"lambda", r.lambda}, {"e", number(r.e)}, {"error", r.error ? json(*r.error) : json(nullptr)}});
        v["asymptotics"] = {{"c_star", table.c_star},
                            {"rows", rows},
                            {"e_decreasing", table.e_decreasing},
                            {"monotone_in_lambda", table.monotone_in_lambda}};
        ok = ok && table.e_decreasing && table.monotone_in_lambda;
    }
    v["all_passed"] = ok;
    out.summary["verification"] = v;
    if (!ok) out.exit_code = kExitVerification;
    export_branch(plan, br, spec.mesh(), {{&br, 1.0, ""}}, "verify");
}

void run_whyburn(const RunPlan& plan, const RunHooks& hooks, RunOutcome& out) {
    const ProblemSpec spec = plan.spec();
    const Regime regime = classify_regime(spec);
    out.summary["regime"] = regime_json(regime);

    WhyburnOptions opts;
    opts.trace = trace_options(plan);
    opts.dlambda_sign = sign_toward(opts.trace.window);
    WhyburnReport rep = whyburn_limit(spec, plan.eps_schedule, opts);
    for (auto& br : rep.branches)
        if (hooks.after_trace) hooks.after_trace(br);

    json w;
    w["eps_schedule"] = rep.eps_schedule;
    json dists = json::array();
    for (double d : rep.pairwise_distances) dists.push_back(number(d));
    w["pairwise_distances"] = dists;
    w["converged"] = rep.converged;
    w["failure"] = rep.failure ? json(*rep.failure) : json(nullptr);
    json branches = json::array();
    json floors = json::array();
    std::size_t lambda_violations = 0;
    for (const auto& br : rep.branches) {
        branches.push_back(branch_json(br));
        floors.push_back(number(lower_bound_scan(br, 0.5).delta0));
        if (regime.predicted_diagram == Diagram::Figure1) lambda_violations += audit_figure_one(br).lambda_violations;
    }
    w["branches"] = branches;
    w["delta0"] = floors;
    std::size_t dead = 0;
    for (const auto& nodes : rep.dead_core_nodes) dead += nodes.empty() ? 0 : 1;
    w["limit_points_with_dead_core"] = dead;
    out.summary["whyburn"] = w;

    json v;
    if (regime.predicted_diagram == Diagram::Figure1) {
        v["figure1_lambda_law"] = lambda_violations == 0;
        if (lambda_violations) out.exit_code = kExitVerification;
    }
    out.summary["verification"] = v;

    if (!rep.branches.empty())
        export_branch(plan, rep.branches.back(), spec.mesh(), whyburn_series(rep.branches), "eps -> 0");
    if (rep.failure && out.exit_code == kExitOk) out.exit_code = kExitSolver;
}

}  // namespace

RunOutcome run(const RunPlan& plan, const RunHooks& hooks) {
    RunOutcome out;
    out.summary["config"] = plan_json(plan);
    out.summary["command"] = to_string(plan.command);
    std::string error;
    try {
        switch (plan.command) {
            case Command::Classify: run_classify(plan, out); break;
            case Command::Eigen: run_eigen(plan, out); break;
            case Command::Solve: run_solve(plan, out); break;
            case Command::Branch: run_branch(plan, hooks, out); break;
            case Command::Verify: run_verify(plan, hooks, out); break;
            case Command::Whyburn: run_whyburn(plan, hooks, out); break;
        }
    } catch (const CertificateError& e) {
        out.exit_code = kExitVerification;
        error = e.what();
    } catch (const SolverError& e) {
        out.exit_code = kExitSolver;
        error = e.what();
    } catch (const DomainError& e) {
        out.exit_code = kExitSolver;
        error = e.what();
    } catch (const Error& e) {
        out.exit_code = kExitConfig;
        error = e.what();
    }
    out.summary["exit_code"] = out.exit_code;
    out.summary["error"] = error.empty() ? json(nullptr) : json(error);

    if (plan.out_json) {
        try {
            write_text_file(*plan.out_json, out.summary.dump(2) + "\n");
        } catch (const IoError& e) {
            out.exit_code = kExitConfig;
            out.summary["exit_code"] = out.exit_code;
            out.summary["error"] = e.what();
        }
    }
    return out;
}

int run_config_file(const std::filesystem::path& path, std::ostream& out, std::ostream& err, const RunHooks& hooks) {
    RunPlan plan;
    try {
        plan = load_config(path);
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    const RunOutcome res = run(plan, hooks);
    if (res.summary.contains("error") && !res.summary["error"].is_null())
        err << "error: " << res.summary["error"].get<std::string>() << '\n';
    if (!plan.out_json) out << res.summary.dump(2) << '\n';
    return res.exit_code;
}

}  // namespace ccn
