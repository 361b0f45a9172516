#include "ccn/mesh.hpp"

#include <cmath>
#include <string>

#include <Eigen/SparseCholesky>

#include "ccn/errors.hpp"

namespace ccn {

namespace {

std::vector<double> axis_coordinates(double lo, double hi, int n) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = lo + (hi - lo) * i / (n - 1);
    x[n - 1] = hi;
    return x;
}

std::vector<double> trapezoid_weights(double h, int n) {
    std::vector<double> w(n, h);
    w.front() = w.back() = 0.5 * h;
    return w;
}

// 1D symmetrized stencil W_1 L_1 on n nodes of spacing h.
std::vector<Eigen::Triplet<double>> axis_stiffness(double h, int n) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(3 * n);
    const double inv_h = 1.0 / h;
    for (int i = 0; i < n; ++i) {
        const bool edge = (i == 0 || i == n - 1);
        t.emplace_back(i, i, edge ? inv_h : 2.0 * inv_h);
        if (i > 0) t.emplace_back(i, i - 1, -inv_h);
        if (i < n - 1) t.emplace_back(i, i + 1, -inv_h);
    }
    return t;
}

}  // namespace

double Domain::measure() const {
    double m = hi[0] - lo[0];
    if (dim == 2) m *= hi[1] - lo[1];
    return m;
}

Mesh Mesh::build(const Domain& domain, int n) {
    if (domain.dim != 1 && domain.dim != 2)
        throw ConfigError("dim must be 1 or 2, got " + std::to_string(domain.dim));
    if (n < 3) throw ConfigError("n must be at least 3, got " + std::to_string(n));
    for (int d = 0; d < domain.dim; ++d) {
        if (!std::isfinite(domain.lo[d]) || !std::isfinite(domain.hi[d]) || !(domain.hi[d] > domain.lo[d]))
            throw ConfigError("degenerate bounds on axis " + std::to_string(d));
    }

    Mesh m;
    m.domain_ = domain;
    m.n_ = n;
    const auto xs = axis_coordinates(domain.lo[0], domain.hi[0], n);
    m.h_[0] = (domain.hi[0] - domain.lo[0]) / (n - 1);
    m.axis_weights_x_ = trapezoid_weights(m.h_[0], n);

    if (domain.dim == 1) {
        m.nodes_.reserve(n);
        m.weights_.resize(n);
        for (int i = 0; i < n; ++i) {
            m.nodes_.push_back({xs[i], 0.0});
            m.weights_[i] = m.axis_weights_x_[i];
        }
        return m;
    }

    const auto ys = axis_coordinates(domain.lo[1], domain.hi[1], n);
    m.h_[1] = (domain.hi[1] - domain.lo[1]) / (n - 1);
    m.axis_weights_y_ = trapezoid_weights(m.h_[1], n);
    m.nodes_.reserve(static_cast<std::size_t>(n) * n);
    m.weights_.resize(static_cast<Eigen::Index>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            m.nodes_.push_back({xs[i], ys[j]});
            m.weights_[static_cast<Eigen::Index>(m.index(i, j))] = m.axis_weights_x_[i] * m.axis_weights_y_[j];
        }
    }
    return m;
}

bool Mesh::on_boundary(std::size_t node) const noexcept {
    if (dim() == 1) return node == 0 || node + 1 == size();
    const int i = static_cast<int>(node / n_);
    const int j = static_cast<int>(node % n_);
    return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
}

double Mesh::boundary_weight(std::size_t node) const noexcept {
    if (dim() == 1) return on_boundary(node) ? 1.0 : 0.0;
    const int i = static_cast<int>(node / n_);
    const int j = static_cast<int>(node % n_);
    double w = 0.0;
    if (i == 0 || i == n_ - 1) w += axis_weights_y_[j];
    if (j == 0 || j == n_ - 1) w += axis_weights_x_[i];
    return w;
}

NeumannOperator::NeumannOperator(const Mesh& mesh) : weights_(mesh.weights()) {
    const int n = mesh.n();
    const auto N = static_cast<Eigen::Index>(mesh.size());
    stiffness_.resize(N, N);

    if (mesh.dim() == 1) {
        const auto t = axis_stiffness(mesh.h()[0], n);
        stiffness_.setFromTriplets(t.begin(), t.end());
        stiffness_.makeCompressed();
        return;
    }

    // A = (Wx Lx) (x) Wy + Wx (x) (Wy Ly)
    const auto tx = axis_stiffness(mesh.h()[0], n);
    const auto ty = axis_stiffness(mesh.h()[1], n);
    const auto wx = trapezoid_weights(mesh.h()[0], n);
    const auto wy = trapezoid_weights(mesh.h()[1], n);
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(5 * N));
    for (const auto& e : tx)
        for (int j = 0; j < n; ++j)
            t.emplace_back(e.row() * n + j, e.col() * n + j, e.value() * wy[j]);
    for (int i = 0; i < n; ++i)
        for (const auto& e : ty)
            t.emplace_back(i * n + e.row(), i * n + e.col(), wx[i] * e.value());
    stiffness_.setFromTriplets(t.begin(), t.end());
    stiffness_.makeCompressed();
}

Vector NeumannOperator::apply_laplacian(const Vector& u) const {
    if (u.size() != weights_.size()) throw ContractError("apply_laplacian: size mismatch");
    return (stiffness_ * u).cwiseQuotient(weights_);
}

NeumannOperator assemble_neumann_laplacian(const Mesh& mesh) { return NeumannOperator(mesh); }

double integrate(const Mesh& mesh, const Vector& values) {
    if (static_cast<std::size_t>(values.size()) != mesh.size())
        throw ContractError("integrate: expected " + std::to_string(mesh.size()) + " values, got " +
                            std::to_string(values.size()));
    return mesh.weights().dot(values);
}

DirichletOperator::DirichletOperator(const NeumannOperator& op, const std::vector<bool>& mask) {
    const auto& A = op.stiffness();
    if (mask.size() != op.size()) throw ContractError("Dirichlet mask size mismatch");

    std::vector<Eigen::Index> local(mask.size(), -1);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            local[i] = static_cast<Eigen::Index>(active_.size());
            active_.push_back(i);
        }
    }
    if (active_.empty()) throw ConfigError("Dirichlet subdomain mask is empty");

    std::vector<bool> is_boundary(mask.size(), false);
    std::vector<Eigen::Triplet<double>> t;
    for (Eigen::Index col = 0; col < A.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(A, col); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row());
            const auto c = static_cast<std::size_t>(it.col());
            if (!mask[r]) continue;
            if (mask[c])
                t.emplace_back(local[r], local[c], it.value());
            else if (it.value() != 0.0)
                is_boundary[c] = true;
        }
    }
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (is_boundary[i]) boundary_.push_back(i);
    if (boundary_.empty()) throw ConfigError("Dirichlet subdomain has no discrete boundary (mask covers the domain)");

    const auto m = static_cast<Eigen::Index>(active_.size());
    matrix_.resize(m, m);
    matrix_.setFromTriplets(t.begin(), t.end());
    matrix_.makeCompressed();
}

Vector solve_dirichlet_poisson(const Mesh& mesh, const std::vector<bool>& mask, const Vector& rhs) {
    if (static_cast<std::size_t>(rhs.size()) != mesh.size()) throw ContractError("solve_dirichlet_poisson: rhs size mismatch");
    if (!rhs.allFinite()) throw ContractError("solve_dirichlet_poisson: rhs not finite");

    const NeumannOperator op(mesh);
    const DirichletOperator dir(op, mask);
    const auto& active = dir.active();

    Vector b(static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(active[k]);
        b[static_cast<Eigen::Index>(k)] = mesh.weights()[i] * rhs[i];
    }

    // Solved in extended precision and rounded once, so discrete solutions that are
    // representable in double (e.g. quadratics on dyadic grids) come out exactly.
    using LongMatrix = Eigen::SparseMatrix<long double>;
    using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const LongMatrix M = dir.matrix().cast<long double>();
    const LongVector bl = b.cast<long double>();
    Eigen::SimplicialLDLT<LongMatrix> ldlt(M);
    if (ldlt.info() != Eigen::Success) throw SingularSystemError("Dirichlet factorization failed");
    LongVector xl = ldlt.solve(bl);
    xl += ldlt.solve(LongVector(bl - M * xl));
    const Vector x = xl.cast<double>();

    Vector w = Vector::Zero(static_cast<Eigen::Index>(mesh.size()));
    for (std::size_t k = 0; k < active.size(); ++k) w[static_cast<Eigen::Index>(active[k])] = x[static_cast<Eigen::Index>(k)];
    return w;
}

}  // namespace ccn
