#include <doctest.h>

#include <cmath>
#include <random>

#include "ccn/errors.hpp"
#include "ccn/mesh.hpp"
#include "ccn/solvers.hpp"
#include "oracles.hpp"

using namespace ccn;

namespace {

Vector sample(const Mesh& m, double (*f)(double)) {
    Vector v(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) v[i] = f(m.nodes()[i].x);
    return v;
}

double second_eigen_dense(int n) {
    const Mesh m = Mesh::build(Domain::interval(0, 1), n);
    const NeumannOperator op(m);
    return oracle::dense_pencil_eigenvalues(op.stiffness(), Vector::Zero(n), m.weights())[1];
}

}  // namespace

TEST_CASE("build: unit interval with five nodes") {
    const Mesh m = Mesh::build(Domain::interval(0, 1), 5);
    CHECK(m.size() == 5);
    CHECK(m.h()[0] == doctest::Approx(0.25));
    CHECK(m.weights().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.weights()[0] == doctest::Approx(0.125));
}

TEST_CASE("build: rectangle measure") {
    const Mesh m = Mesh::build(Domain::rectangle(0, 1, 0, 2), 4);
    CHECK(m.size() == 16);
    CHECK(std::abs(m.weights().sum() - 2.0) <= 1e-12 * 2.0);
}

TEST_CASE("build: preconditions") {
    CHECK_THROWS_AS(Mesh::build(Domain::interval(0, 1), 2), ConfigError);
    CHECK_THROWS_AS(Mesh::build(Domain::interval(1, 1), 8), ConfigError);
    CHECK_THROWS_AS(Mesh::build(Domain::rectangle(0, 1, 2, 2), 8), ConfigError);
    Domain bad = Domain::interval(0, 1);
    bad.dim = 3;
    CHECK_THROWS_AS(Mesh::build(bad, 8), ConfigError);
}

TEST_CASE("mesh invariants hold in 1D and 2D") {
    for (const Domain& d : {Domain::interval(-1, 2), Domain::rectangle(0, 2, -1, 0.5)}) {
        for (int n : {3, 7, 20}) {
            const Mesh m = Mesh::build(d, n);
            CHECK(m.weights().minCoeff() > 0.0);
            CHECK(std::abs(m.weights().sum() - d.measure()) <= 1e-12 * d.measure());
            for (std::size_t i = 1; i < m.size(); ++i) {
                const Point& a = m.nodes()[i - 1];
                const Point& b = m.nodes()[i];
                CHECK((a.x < b.x || (a.x == b.x && a.y < b.y)));
            }
        }
    }
}

TEST_CASE("Neumann operator: constants in kernel, symmetric, semidefinite") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g;
    for (const Domain& d : {Domain::interval(0, 1), Domain::rectangle(0, 1, 0, 2)}) {
        const Mesh m = Mesh::build(d, 12);
        const NeumannOperator op(m);
        const SparseMatrix& A = op.stiffness();
        const Vector one = Vector::Ones(m.size());
        CHECK((A * one).lpNorm<Eigen::Infinity>() <= 1e-12 * A.coeffs().cwiseAbs().maxCoeff());
        CHECK(op.apply_laplacian(one).lpNorm<Eigen::Infinity>() <= 1e-12 * A.coeffs().cwiseAbs().maxCoeff());
        const SparseMatrix At = A.transpose();
        CHECK((Eigen::MatrixXd(A) - Eigen::MatrixXd(At)).cwiseAbs().maxCoeff() == 0.0);
        for (int trial = 0; trial < 50; ++trial) {
            Vector v(m.size());
            for (auto& x : v) x = g(rng);
            CHECK(v.dot(A * v) / v.squaredNorm() >= -1e-10);
        }
    }
}

TEST_CASE("unsymmetrized stencil has zero row sums") {
    for (const Domain& d : {Domain::interval(0, 3), Domain::rectangle(0, 1, 0, 1)}) {
        const Mesh m = Mesh::build(d, 9);
        const NeumannOperator op(m);
        const Vector Lw = op.apply_laplacian(Vector::Ones(m.size()));
        CHECK(Lw.cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("discrete Green identity") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    const Mesh m = Mesh::build(Domain::rectangle(0, 1, 0, 1), 10);
    const NeumannOperator op(m);
    for (int trial = 0; trial < 20; ++trial) {
        Vector u(m.size()), v(m.size());
        for (auto& x : u) x = U(rng);
        for (auto& x : v) x = U(rng);
        const double lhs = (op.stiffness() * u).dot(v);
        const double rhs = u.dot(op.stiffness() * v);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("Laplacian of cos(pi x)") {
    const Mesh m = Mesh::build(Domain::interval(0, 1), 128);
    const NeumannOperator op(m);
    const Vector u = sample(m, [](double x) { return std::cos(M_PI * x); });
    const Vector err = op.apply_laplacian(u) - M_PI * M_PI * u;
    CHECK(err.lpNorm<Eigen::Infinity>() <= 5e-3);
}

TEST_CASE("second Neumann eigenvalue against the dense oracle") {
    // iterative solver agrees with dense diagonalization at n = 16
    const Mesh m16 = Mesh::build(Domain::interval(0, 1), 16);
    const NeumannOperator op16(m16);
    const EigenResult r = second_eigenpair(op16.stiffness(), Vector::Zero(16), m16.weights());
    CHECK(std::abs(r.value - second_eigen_dense(16)) <= 1e-9 * second_eigen_dense(16));

    const double e64 = second_eigen_dense(64);
    const double e128 = second_eigen_dense(128);
    CHECK(std::abs(e64 - M_PI * M_PI) <= 0.01);
    // Richardson extrapolation in h = 1/(n-1)
    const double h1 = 1.0 / 63.0, h2 = 1.0 / 127.0;
    const double extrap = (e128 * h1 * h1 - e64 * h2 * h2) / (h1 * h1 - h2 * h2);
    CHECK(std::abs(extrap - M_PI * M_PI) <= 1e-4);
}

TEST_CASE("second eigenvalue error shrinks fourfold under refinement") {
    const double pi2 = M_PI * M_PI;
    const double e32 = std::abs(second_eigen_dense(33) - pi2);
    const double e64 = std::abs(second_eigen_dense(65) - pi2);
    const double e128 = std::abs(second_eigen_dense(129) - pi2);
    CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(e64 / e128 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("integrate") {
    const Mesh m1 = Mesh::build(Domain::interval(0, 1), 17);
    CHECK(integrate(m1, Vector::Ones(17)) == doctest::Approx(1.0).epsilon(1e-14));
    const Mesh m101 = Mesh::build(Domain::interval(0, 1), 101);
    CHECK(std::abs(integrate(m101, sample(m101, [](double x) { return x; })) - 0.5) <= 1e-12);
    const Mesh m64 = Mesh::build(Domain::interval(0, 1), 64);
    CHECK(std::abs(integrate(m64, sample(m64, [](double x) { return std::cos(2 * M_PI * x); }))) <= 1e-10);
    CHECK_THROWS_AS(integrate(m64, Vector::Ones(63)), ContractError);
}

TEST_CASE("Dirichlet Poisson on a sub-interval") {
    const Mesh m = Mesh::build(Domain::interval(-1, 2), 49);
    const double h = m.h()[0];
    std::vector<bool> mask(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) mask[i] = m.nodes()[i].x > 1e-12 && m.nodes()[i].x < 1 - 1e-12;
    const Vector w = solve_dirichlet_poisson(m, mask, Vector::Ones(m.size()));
    CHECK(std::abs(w.maxCoeff() - 0.125) <= 2 * h * h);
    CHECK(w.minCoeff() >= 0.0);
    for (std::size_t i = 0; i < m.size(); ++i)
        if (!mask[i]) CHECK(w[i] == 0.0);
    // the discrete solution of -w'' = 1 reproduces the quadratic exactly
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double x = m.nodes()[i].x;
        if (mask[i]) CHECK(w[i] == doctest::Approx(x * (1 - x) / 2).epsilon(1e-10));
    }

    CHECK(solve_dirichlet_poisson(m, mask, Vector::Zero(m.size())).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(solve_dirichlet_poisson(m, std::vector<bool>(m.size(), true), Vector::Ones(m.size())),
                    ConfigError);
    CHECK_THROWS_AS(solve_dirichlet_poisson(m, std::vector<bool>(m.size(), false), Vector::Ones(m.size())),
                    ConfigError);
}

TEST_CASE("Dirichlet operator is SPD and the maximum principle holds in 2D") {
    const Mesh m = Mesh::build(Domain::rectangle(0, 1, 0, 1), 11);
    std::vector<bool> mask(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
        const Point& p = m.nodes()[i];
        mask[i] = p.x > 0.15 && p.x < 0.85 && p.y > 0.25 && p.y < 0.75;
    }
    const DirichletOperator D(NeumannOperator(m), mask);
    const Eigen::MatrixXd M(D.matrix());
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(M).info() == Eigen::Success);
    CHECK(!D.boundary().empty());
    const Vector w = solve_dirichlet_poisson(m, mask, Vector::Ones(m.size()));
    CHECK(w.minCoeff() >= 0.0);
    CHECK(w.maxCoeff() > 0.0);
}
