#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include <Eigen/Dense>

#include "ccn/expr.hpp"
#include "ccn/mesh.hpp"

namespace oracle {

/// Eigenvalues (ascending) of A - W diag(m) phi = sigma W phi via a dense
/// symmetric eigendecomposition of W^{-1/2} (A - W diag(m)) W^{-1/2}.
inline Eigen::VectorXd dense_pencil_eigenvalues(const ccn::SparseMatrix& A, const Eigen::VectorXd& m,
                                                const Eigen::VectorXd& W) {
    Eigen::MatrixXd K = Eigen::MatrixXd(A);
    K.diagonal() -= W.cwiseProduct(m);
    const Eigen::VectorXd s = W.cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd S = s.asDiagonal() * K * s.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    return es.eigenvalues();
}

/// Dense LU solve.
inline Eigen::VectorXd dense_solve(const ccn::SparseMatrix& A, const Eigen::VectorXd& b) {
    return Eigen::MatrixXd(A).fullPivLu().solve(b);
}

/// Random expression trees over x, y with total, finite operations on [0.1, 2]^2.
class ExprGen {
public:
    explicit ExprGen(std::uint32_t seed) : rng_(seed) {}

    ccn::Expr tree(int depth) {
        using ccn::Expr;
        std::uniform_int_distribution<int> leaf_or_node(0, depth <= 0 ? 0 : 9);
        if (leaf_or_node(rng_) < 3) return leaf();
        std::uniform_int_distribution<int> kind(0, 9);
        switch (kind(rng_)) {
            case 0: return Expr::negate(tree(depth - 1));
            case 1: return Expr::binary(Expr::Kind::Add, tree(depth - 1), tree(depth - 1));
            case 2: return Expr::binary(Expr::Kind::Sub, tree(depth - 1), tree(depth - 1));
            case 3: return Expr::binary(Expr::Kind::Mul, tree(depth - 1), tree(depth - 1));
            case 4: return Expr::call(Expr::Func::Sin, {tree(depth - 1)});
            case 5: return Expr::call(Expr::Func::Cos, {tree(depth - 1)});
            case 6: return Expr::call(Expr::Func::Abs, {tree(depth - 1)});
            case 7: return Expr::call(Expr::Func::Min, {tree(depth - 1), tree(depth - 1)});
            case 8: return Expr::call(Expr::Func::Max, {tree(depth - 1), tree(depth - 1)});
            default: return Expr::call(Expr::Func::Step, {tree(depth - 1)});
        }
    }

    ccn::Expr leaf() {
        using ccn::Expr;
        std::uniform_int_distribution<int> k(0, 3);
        switch (k(rng_)) {
            case 0: return Expr::variable(Expr::Var::X);
            case 1: return Expr::variable(Expr::Var::Y);
            case 2: return Expr::pi();
            default: {
                std::uniform_real_distribution<double> v(0.0, 5.0);
                return Expr::number(v(rng_));
            }
        }
    }

    std::mt19937& rng() { return rng_; }

private:
    std::mt19937 rng_;
};

/// Table-driven evaluator: a plain switch over the tree, written independently
/// of the library's evaluator.
inline double table_eval(const ccn::Expr& e, double x, double y) {
    using K = ccn::Expr::Kind;
    using F = ccn::Expr::Func;
    switch (e.kind()) {
        case K::Number: return e.value();
        case K::Variable: return e.var() == ccn::Expr::Var::X ? x : y;
        case K::Pi: return M_PI;
        case K::Negate: return -table_eval(e.args()[0], x, y);
        case K::Add: return table_eval(e.args()[0], x, y) + table_eval(e.args()[1], x, y);
        case K::Sub: return table_eval(e.args()[0], x, y) - table_eval(e.args()[1], x, y);
        case K::Mul: return table_eval(e.args()[0], x, y) * table_eval(e.args()[1], x, y);
        case K::Div: return table_eval(e.args()[0], x, y) / table_eval(e.args()[1], x, y);
        case K::Pow: return std::pow(table_eval(e.args()[0], x, y), table_eval(e.args()[1], x, y));
        case K::Call: {
            const double a = table_eval(e.args()[0], x, y);
            switch (e.func()) {
                case F::Sin: return std::sin(a);
                case F::Cos: return std::cos(a);
                case F::Exp: return std::exp(a);
                case F::Abs: return std::fabs(a);
                case F::Min: return std::fmin(a, table_eval(e.args()[1], x, y));
                case F::Max: return std::fmax(a, table_eval(e.args()[1], x, y));
                case F::Step: return a > 0.0 ? 1.0 : 0.0;
            }
        }
    }
    return NAN;
}

}  // namespace oracle
