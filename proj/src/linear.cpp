#include <cmath>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "ccn/errors.hpp"
#include "ccn/solvers.hpp"

namespace ccn {

namespace {

constexpr double kMaxCondition = 1e14;

double inf_norm(const SparseMatrix& m) {
    Vector row_sums = Vector::Zero(m.rows());
    for (Eigen::Index c = 0; c < m.outerSize(); ++c)
        for (SparseMatrix::InnerIterator it(m, c); it; ++it) row_sums[it.row()] += std::abs(it.value());
    return row_sums.size() ? row_sums.maxCoeff() : 0.0;
}

}  // namespace

struct SparseFactorization::Impl {
    SparseMatrix matrix;
    double norm = 0.0;
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

SparseFactorization::SparseFactorization(const SparseMatrix& matrix) : impl_(std::make_unique<Impl>()) {
    if (matrix.rows() != matrix.cols()) throw ContractError("solve_linear: matrix is not square");
    impl_->matrix = matrix;
    impl_->matrix.makeCompressed();
    impl_->norm = inf_norm(impl_->matrix);
    impl_->lu.analyzePattern(impl_->matrix);
    impl_->lu.factorize(impl_->matrix);
    if (impl_->lu.info() != Eigen::Success) throw SingularSystemError("sparse LU failed: " + impl_->lu.lastErrorMessage());
}

SparseFactorization::~SparseFactorization() = default;
SparseFactorization::SparseFactorization(SparseFactorization&&) noexcept = default;
SparseFactorization& SparseFactorization::operator=(SparseFactorization&&) noexcept = default;

Vector SparseFactorization::solve(const Vector& rhs) const {
    if (rhs.size() != impl_->matrix.rows()) throw ContractError("solve_linear: rhs size mismatch");
    Vector x = impl_->lu.solve(rhs);
    if (!x.allFinite()) throw SingularSystemError("sparse LU produced a non-finite solution");
    x += impl_->lu.solve(Vector(rhs - impl_->matrix * x));
    if (!x.allFinite()) throw SingularSystemError("sparse LU produced a non-finite solution");

    const double rhs_norm = rhs.lpNorm<Eigen::Infinity>();
    if (rhs_norm > 0.0 && impl_->norm * x.lpNorm<Eigen::Infinity>() > kMaxCondition * rhs_norm)
        throw SingularSystemError("matrix is numerically singular (condition estimate above 1e14)");
    return x;
}

Vector solve_linear(const SparseMatrix& matrix, const Vector& rhs) { return SparseFactorization(matrix).solve(rhs); }

}  // namespace ccn
