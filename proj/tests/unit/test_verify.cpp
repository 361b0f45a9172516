#include <doctest.h>

#include <cmath>
#include <limits>

#include "ccn/errors.hpp"
#include "ccn/verify.hpp"

using namespace ccn;

namespace {

Mesh unit(int n) { return Mesh::build(Domain::interval(0, 1), n); }

ProblemSpec constant_spec(int n = 32) { return ProblemSpec::from_text(unit(n), "-1", "1", 4, 1.5, 0); }

Solution constant_solution(std::size_t n, double c, double lambda) {
    Solution s;
    s.u = Vector::Constant(static_cast<Eigen::Index>(n), c);
    s.lambda = lambda;
    return s;
}

ComparisonProblem concave_convex(const Mesh& m, double lambda) {
    ComparisonProblem cp;
    cp.mesh = &m;
    cp.dirichlet_mask.assign(m.size(), false);
    cp.f = [lambda](std::size_t, double t) { return lambda * std::sqrt(t) - t * t * t; };
    return cp;
}

// Figure-1 branch shared by several checks.
const Branch& figure_one_branch(const ProblemSpec& s) {
    static const Branch br = [&] {
        TraceOptions o;
        o.ds = 0.05;
        o.window = LambdaWindow{-2.0, 0.0, true, false};
        return trace_branch(s, start_from_zero(s, -1, o.ds), o);
    }();
    return br;
}

const ProblemSpec& figure_one_spec() {
    static const ProblemSpec s = ProblemSpec::from_text(unit(64), "cos(2*pi*x)", "1", 4, 1.5, 1e-3);
    return s;
}

}  // namespace

TEST_CASE("nonexistence identity on a nonconstant solution at lambda = -0.5") {
    const ProblemSpec& s = figure_one_spec();
    const Branch& br = figure_one_branch(s);
    std::size_t best = 0;
    for (std::size_t k = 0; k < br.points.size(); ++k)
        if (std::abs(br.points[k].solution.lambda + 0.5) < std::abs(br.points[best].solution.lambda + 0.5)) best = k;
    const Solution sol = newton_solve(s, -0.5, br.points[best].solution.u);
    CHECK(nonexistence_identity(s, -0.5, sol) < 0.0);
}

TEST_CASE("nonexistence identity on the minimal branch") {
    const ProblemSpec s = ProblemSpec::from_text(unit(64), "-1+0.5*cos(2*pi*x)", "1", 4, 1.5, 0);
    const Solution sol = minimal_solution_near_zero(s, 0.3);
    CHECK(nonexistence_identity(s, 0.3, sol) < 0.0);
}

TEST_CASE("nonexistence identity preconditions") {
    const ProblemSpec s = constant_spec();
    CHECK_THROWS_AS(nonexistence_identity(s, 1.0, constant_solution(32, 1.0, 1.0)), InapplicableError);
    Solution z = constant_solution(32, 1.0, 1.0);
    z.u[4] = 0.0;
    CHECK_THROWS_AS(nonexistence_identity(s, 1.0, z), DomainError);
}

TEST_CASE("discrete identity holds for arbitrary positive profiles") {
    // <A u, u^{1-p}> <= 0 for any positive nonconstant u, so the identity of any
    // exact discrete solution is negative; check the underlying inequality directly.
    const ProblemSpec s = constant_spec(40);
    Vector u(40);
    for (int i = 0; i < 40; ++i) u[i] = 1.0 + 0.5 * std::sin(0.3 * i);
    const Vector t = u.array().pow(1.0 - s.p());
    CHECK((s.stiffness() * u).dot(t) < 0.0);
}

TEST_CASE("positivity floor") {
    const ProblemSpec s = constant_spec();
    CHECK(positivity_floor(s, 1.0, constant_solution(32, 1.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-10));
    const Solution at4 = newton_solve(s, 4.0, Vector::Ones(32));
    CHECK(positivity_floor(s, 1.0, at4) == doctest::Approx(std::pow(4.0, 0.4)).epsilon(1e-9));
    CHECK(positivity_floor(s, 1.0, at4) == doctest::Approx(1.7411).epsilon(1e-4));
    Solution z = constant_solution(32, 1.0, 1.0);
    z.u[0] = 0.0;
    CHECK_THROWS_AS(positivity_floor(s, 1.0, z), DomainError);
    CHECK_THROWS_AS(positivity_floor(s, 2.0, constant_solution(32, 1.0, 1.0)), DomainError);
}

TEST_CASE("lower_bound_scan") {
    const ProblemSpec& s = figure_one_spec();
    const Branch& br = figure_one_branch(s);
    const FloorScan half = lower_bound_scan(br, 0.5);
    CHECK(half.selected > 0);
    CHECK(half.delta0 > 0.0);
    CHECK(std::isfinite(half.delta0));
    CHECK(lower_bound_scan(br, 0.25).delta0 <= half.delta0);
    const FloorScan none = lower_bound_scan(br, 10.0);
    CHECK(none.selected == 0);
    CHECK(none.delta0 == std::numeric_limits<double>::infinity());
}

TEST_CASE("Figure-1 audit") {
    const ProblemSpec& s = figure_one_spec();
    const Branch& br = figure_one_branch(s);
    const FigureOneAudit a = audit_figure_one(br);
    CHECK(a.points == br.points.size());
    CHECK(a.lambda_violations == 0);
    CHECK(a.stable_nonconstant == 0);
    Branch bad = br;
    bad.points.back().solution.lambda = 0.1;
    CHECK(audit_figure_one(bad).lambda_violations == 1);
}

TEST_CASE("bound certificate: exact constant") {
    const Mesh m = Mesh::build(Domain::interval(-1, 2), 49);
    const ProblemSpec s = ProblemSpec::from_text(m, "-1", "1", 4, 1.5, 0);
    std::vector<bool> mask(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) mask[i] = m.nodes()[i].x > 1e-12 && m.nodes()[i].x < 1 - 1e-12;
    const BoundCertificate c = build_supersolution(s, 2.0, 1.0, mask);
    CHECK(c.max_w0 == 0.125);
    CHECK(c.C == 4.5);
    CHECK(c.C == certificate_constant(c.C1, c.lambda_window, c.max_b, c.max_w0, s.q()));
    CHECK(c.worst_margin >= -1e-10);
    CHECK(c.w1.minCoeff() >= c.C);
    CHECK((c.w1 - c.C * (Vector::Ones(m.size()) + c.w0)).cwiseAbs().maxCoeff() == 0.0);

    const BoundCertificate z = build_supersolution(s, 0.0, 1.0, mask);
    CHECK(z.C == 1.0);
    CHECK_THROWS_AS(build_supersolution(s, 2.0, 1.0, std::vector<bool>(m.size(), false)), ConfigError);
    CHECK_THROWS_AS(build_supersolution(s, -1.0, 1.0, mask), DomainError);
    CHECK_THROWS_AS(build_supersolution(s, 2.0, -1.0, mask), DomainError);
}

TEST_CASE("certificate constant formula") {
    CHECK(certificate_constant(1.0, 2.0, 1.0, 0.125, 1.5) == 4.5);
    CHECK(certificate_constant(7.0, 2.0, 1.0, 0.125, 1.5) == 7.0);
    CHECK(certificate_constant(3.0, 0.0, 1.0, 0.5, 1.2) == 3.0);
    // equivalent (2-q)-th root form
    const double C = certificate_constant(0.5, 1.3, 2.0, 0.3, 1.25);
    CHECK(std::pow(C, 0.75) == doctest::Approx(std::max(std::pow(0.5, 0.75), 1.3 * 2.0 * std::pow(1.3, 0.25))));
}

TEST_CASE("bound certificate rejects a mask touching a >= 0") {
    const ProblemSpec s = ProblemSpec::from_text(unit(33), "cos(2*pi*x)-0.1", "1", 4, 1.5, 0);
    std::vector<bool> all(s.size(), true);
    all.front() = all.back() = false;
    CHECK_THROWS_AS(build_supersolution(s, 1.0, 1.0, all), DomainError);
    const auto neg = negative_set(s);
    CHECK(!neg.front());
    CHECK(neg[16]);
    CHECK_NOTHROW(build_supersolution(s, 1.0, 1.0, neg));
}

TEST_CASE("comparison principle examples") {
    const Mesh m = unit(32);
    const ComparisonProblem cp = concave_convex(m, 1.0);
    const Vector half = Vector::Constant(32, 0.5), one = Vector::Ones(32), two = Vector::Constant(32, 2.0);

    const ComparisonResult ok = comparison_check(cp, half, one);
    CHECK(ok.verdict);
    CHECK(ok.failing.empty());
    CHECK(ok.max_violation == 0.0);

    const ComparisonResult refl = comparison_check(cp, one, one);
    CHECK(refl.verdict);
    CHECK(refl.max_violation == 0.0);

    const ComparisonResult bad = comparison_check(cp, two, one);
    CHECK(!bad.verdict);
    CHECK(bad.failing.find("u is not a subsolution") != std::string::npos);

    // swapping a strict pair flips the verdict
    CHECK(!comparison_check(cp, one, half).verdict);
}

TEST_CASE("comparison principle with a Dirichlet part and boundary reaction") {
    const Mesh m = unit(32);
    ComparisonProblem cp = concave_convex(m, 1.0);
    cp.dirichlet_mask[0] = true;
    cp.C1 = 0.75;
    cp.g = [](std::size_t, double t) { return -1e-3 * t; };
    const Vector half = Vector::Constant(32, 0.5), one = Vector::Ones(32);
    CHECK(comparison_check(cp, half, one).verdict);
    cp.C1 = 0.4;
    const ComparisonResult r = comparison_check(cp, half, one);
    CHECK(!r.verdict);
    CHECK(r.failing.find("boundary order") != std::string::npos);
}

TEST_CASE("comparison principle preconditions") {
    const Mesh m = unit(16);
    ComparisonProblem cp = concave_convex(m, 1.0);
    Vector v = Vector::Ones(16);
    v[5] = 0.0;
    CHECK_THROWS_AS(comparison_check(cp, Vector::Constant(16, 0.5), v), DomainError);
    CHECK_THROWS_AS(comparison_check(cp, Vector::Constant(15, 0.5), Vector::Ones(16)), ContractError);
    CHECK_THROWS_AS(comparison_check(cp, Vector::Constant(16, -0.5), Vector::Ones(16)), DomainError);
    cp.dirichlet_mask[5] = true;
    CHECK_THROWS_AS(comparison_check(cp, Vector::Constant(16, 0.5), Vector::Ones(16)), ContractError);
}

TEST_CASE("asymptotic check: constant coefficients are exact") {
    const ProblemSpec s = constant_spec(32);
    const AsymptoticTable t = asymptotic_check(s, {0.2, 0.1, 0.05});
    CHECK(t.c_star == doctest::Approx(1.0));
    for (const auto& row : t.rows) {
        CHECK(!row.error);
        CHECK(row.e <= 1e-10);
    }
    CHECK_THROWS_AS(asymptotic_check(s, {0.1}), ConfigError);
    CHECK_THROWS_AS(asymptotic_check(s, {0.1, 0.2, 0.05}), ConfigError);
    CHECK_THROWS_AS(asymptotic_check(s, {0.5, 0.1, 0.05}), ConfigError);
    CHECK_THROWS_AS(asymptotic_check(ProblemSpec::from_text(unit(32), "cos(2*pi*x)", "1", 4, 1.5, 0), {0.2, 0.1, 0.05}),
                    DomainError);
}

TEST_CASE("asymptotic check: variable coefficient converges") {
    const ProblemSpec s = ProblemSpec::from_text(unit(64), "-1+0.5*cos(2*pi*x)", "1", 4, 1.5, 0);
    const AsymptoticTable t = asymptotic_check(s, {0.2, 0.1, 0.05, 0.025});
    CHECK(t.e_decreasing);
    CHECK(t.monotone_in_lambda);
    for (const auto& row : t.rows) {
        CHECK(!row.error);
        REQUIRE(row.cross_check);
        CHECK(*row.cross_check <= 1e-8);
    }
}

TEST_CASE("uniqueness probe without a positive part of a") {
    const ProblemSpec s = ProblemSpec::from_text(unit(64), "-1+0.5*cos(2*pi*x)", "1", 4, 1.5, 0);
    std::vector<Vector> limits;
    for (double c : {0.1, 0.5, 1.0, 2.0, 3.0}) {
        Vector u0(64);
        for (int i = 0; i < 64; ++i) u0[i] = c * (1.0 + 0.3 * std::sin(7.0 * i / 63.0));
        limits.push_back(newton_solve(s, 1.0, u0).u);
    }
    for (std::size_t i = 1; i < limits.size(); ++i) CHECK((limits[i] - limits[0]).lpNorm<Eigen::Infinity>() <= 1e-8);
}
