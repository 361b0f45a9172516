#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include <Eigen/SparseCholesky>

#include "ccn/errors.hpp"
#include "ccn/solvers.hpp"

namespace ccn {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kRayleighTol = 1e-10;

using Ldlt = Eigen::SimplicialLDLT<SparseMatrix>;

SparseMatrix pencil_operator(const SparseMatrix& A, const Vector& m, const Vector& W) {
    if (A.rows() != A.cols() || A.rows() != m.size() || m.size() != W.size())
        throw ContractError("eigenproblem: size mismatch");
    if (!(W.minCoeff() > 0.0)) throw ContractError("eigenproblem: mass weights must be positive");
    SparseMatrix K = A;
    for (Eigen::Index i = 0; i < m.size(); ++i) K.coeffRef(i, i) -= W[i] * m[i];
    K.makeCompressed();
    return K;
}

// Gershgorin lower bound for the symmetric matrix W^{-1/2} K W^{-1/2}.
double gershgorin_lower(const SparseMatrix& K, const Vector& W) {
    Vector diag = Vector::Zero(K.rows());
    Vector off = Vector::Zero(K.rows());
    for (Eigen::Index c = 0; c < K.outerSize(); ++c) {
        for (SparseMatrix::InnerIterator it(K, c); it; ++it) {
            const auto r = it.row();
            if (r == c)
                diag[r] += it.value() / W[r];
            else
                off[r] += std::abs(it.value()) / std::sqrt(W[r] * W[c]);
        }
    }
    return (diag - off).minCoeff();
}

double diagonal_scale(const SparseMatrix& K, const Vector& W) {
    double s = 1.0;
    for (Eigen::Index i = 0; i < K.rows(); ++i) s = std::max(s, std::abs(K.coeff(i, i) / W[i]));
    return s;
}

SparseMatrix shifted(const SparseMatrix& K, const Vector& W, double shift) {
    SparseMatrix M = K;
    for (Eigen::Index i = 0; i < W.size(); ++i) M.coeffRef(i, i) -= shift * W[i];
    return M;
}

// Factorization of K - shift W, only if it is positive definite.
std::unique_ptr<Ldlt> factor_below_spectrum(const SparseMatrix& K, const Vector& W, double shift) {
    auto f = std::make_unique<Ldlt>();
    f->compute(shifted(K, W, shift));
    if (f->info() != Eigen::Success) return nullptr;
    if (!(f->vectorD().minCoeff() > 0.0)) return nullptr;
    return f;
}

double w_norm(const Vector& x, const Vector& W) { return std::sqrt(x.cwiseProduct(W).dot(x)); }

void normalize_max(Vector& x) {
    Eigen::Index idx = 0;
    x.cwiseAbs().maxCoeff(&idx);
    x /= x[idx];
}

}  // namespace

EigenResult smallest_eigenpair(const SparseMatrix& stiffness, const Vector& weight_diag, const Vector& mass) {
    const SparseMatrix K = pencil_operator(stiffness, weight_diag, mass);
    const Vector& W = mass;
    const double scale = diagonal_scale(K, W);

    double shift = gershgorin_lower(K, W) - 1e-6 * scale;
    auto factor = factor_below_spectrum(K, W, shift);
    if (!factor) throw SolverError("eigenproblem: Gershgorin shift failed to give a definite matrix");

    Vector x = Vector::Ones(K.rows());
    x /= w_norm(x, W);
    double rho = x.dot(K * x);
    double rho_prev = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= kMaxIterations; ++it) {
        Vector y = factor->solve(Vector(W.cwiseProduct(x)));
        x = y / w_norm(y, W);
        const Vector Kx = K * x;
        rho = x.dot(Kx);
        const Vector r = Kx - rho * W.cwiseProduct(x);
        const double rnorm = std::sqrt(r.cwiseQuotient(W).dot(r));

        if (std::abs(rho - rho_prev) <= kRayleighTol * std::max(1.0, std::abs(rho)) &&
            rnorm <= 1e-7 * std::max(1.0, std::abs(rho))) {
            EigenResult res;
            res.value = rho;
            res.vector = x;
            res.iterations = it;
            normalize_max(res.vector);
            if (res.vector.minCoeff() < -1e-8)
                throw SolverError("eigenproblem: principal eigenvector is not single-signed");
            return res;
        }
        rho_prev = rho;

        // Raise the shift toward the Rayleigh quotient while it provably stays below
        // the smallest eigenvalue (positive definite K - shift W).
        const double candidate = rho - 2.0 * rnorm - 1e-12 * scale;
        if (candidate > shift + 1e-3 * (rho - shift)) {
            if (auto f = factor_below_spectrum(K, W, candidate)) {
                factor = std::move(f);
                shift = candidate;
            }
        }
    }
    throw NoConvergenceError("eigenproblem: inverse iteration did not converge in 500 iterations", x);
}

EigenResult second_eigenpair(const SparseMatrix& stiffness, const Vector& weight_diag, const Vector& mass) {
    const SparseMatrix K = pencil_operator(stiffness, weight_diag, mass);
    const Vector& W = mass;
    const double scale = diagonal_scale(K, W);

    const EigenResult first = smallest_eigenpair(stiffness, weight_diag, mass);
    Vector phi1 = first.vector;
    phi1 /= w_norm(phi1, W);
    const auto deflate = [&](Vector& v) { v -= phi1.dot(W.cwiseProduct(v)) * phi1; };

    // Just below the first eigenvalue the deflated iteration converges at rate
    // (sigma2 - shift) / (sigma3 - shift).
    auto factor = factor_below_spectrum(K, W, first.value - 1e-6 * scale);
    if (!factor) factor = factor_below_spectrum(K, W, gershgorin_lower(K, W) - 1e-6 * scale);
    if (!factor) throw SolverError("eigenproblem: Gershgorin shift failed to give a definite matrix");

    Vector x(K.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) + 0.5 * std::sin(static_cast<double>(i));
    deflate(x);
    x /= w_norm(x, W);

    double rho_prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= 4 * kMaxIterations; ++it) {
        Vector y = factor->solve(Vector(W.cwiseProduct(x)));
        deflate(y);
        x = y / w_norm(y, W);
        const double rho = x.dot(K * x);
        if (std::abs(rho - rho_prev) <= 1e-11 * std::max(1.0, std::abs(rho))) {
            EigenResult res{rho, x, it};
            Eigen::Index idx = 0;
            res.vector.cwiseAbs().maxCoeff(&idx);
            res.vector /= res.vector[idx];
            return res;
        }
        rho_prev = rho;
    }
    throw NoConvergenceError("eigenproblem: deflated inverse iteration did not converge", x);
}

EigenResult sigma_lambda(const Mesh& mesh, const CoefficientField& b, double lambda) {
    const NeumannOperator op(mesh);
    EigenResult res = smallest_eigenpair(op.stiffness(), lambda * b.samples, mesh.weights());
    if (lambda > 0.0 && !(res.value < 0.0))
        throw SolverError("sigma_lambda: expected a negative principal eigenvalue for lambda > 0");
    return res;
}

EigenResult sigma_eps(const Mesh& mesh, const CoefficientField& b, double lambda, double eps, double q) {
    if (!(eps > 0.0 && eps <= 1.0)) throw DomainError("sigma_eps requires eps in (0, 1]");
    const NeumannOperator op(mesh);
    const Vector m = lambda * std::pow(eps, q - 2.0) * b.samples;
    EigenResult res = smallest_eigenpair(op.stiffness(), m, mesh.weights());
    const double band = 1e-12 * linearization_scale(m);
    const bool ok = lambda > 0.0 ? res.value < 0.0 : (lambda < 0.0 ? res.value > 0.0 : std::abs(res.value) <= band);
    if (!ok) throw SolverError("sigma_eps: sign trichotomy violated");
    return res;
}

double linearization_scale(const Vector& weight_diag) {
    const double s = weight_diag.size() ? weight_diag.cwiseAbs().maxCoeff() : 0.0;
    return s > 0.0 ? s : 1.0;
}

double gamma1(const ProblemSpec& spec, Solution& solution) {
    const Vector m = linearization_weight(spec, solution.lambda, solution.u);
    const EigenResult res = smallest_eigenpair(spec.stiffness(), m, spec.weights());
    solution.gamma1 = res.value;
    solution.stability = stability_classify(res.value, linearization_scale(m));
    return res.value;
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::Stable: return "stable";
        case Stability::Unstable: return "unstable";
        case Stability::Neutral: return "neutral";
    }
    return "?";
}

Stability stability_classify(double gamma1, double scale) {
    if (!(scale > 0.0)) throw ContractError("stability_classify requires scale > 0");
    if (gamma1 > kNeutralBand * scale) return Stability::Stable;
    if (gamma1 < -kNeutralBand * scale) return Stability::Unstable;
    return Stability::Neutral;
}

}  // namespace ccn
