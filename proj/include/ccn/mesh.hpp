#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace ccn {

using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// An interval (dim 1) or axis-aligned rectangle (dim 2).
struct Domain {
    int dim = 1;
    std::array<double, 2> lo{0.0, 0.0};
    std::array<double, 2> hi{1.0, 1.0};

    static Domain interval(double a, double b) { return {1, {a, 0.0}, {b, 0.0}}; }
    static Domain rectangle(double x0, double x1, double y0, double y1) { return {2, {x0, y0}, {x1, y1}}; }

    double measure() const;
};

/// Structured node grid with lumped trapezoidal quadrature.
///
/// Nodes are stored lexicographically: index = i * n + j where i runs over x
/// and j over y. In 1D the index is simply i.
class Mesh {
public:
    /// Throws ConfigError if n < 3, dim is not 1 or 2, or the bounds are degenerate.
    static Mesh build(const Domain& domain, int n);

    const Domain& domain() const noexcept { return domain_; }
    int dim() const noexcept { return domain_.dim; }
    int n() const noexcept { return n_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    const std::vector<Point>& nodes() const noexcept { return nodes_; }
    const Vector& weights() const noexcept { return weights_; }
    const std::array<double, 2>& h() const noexcept { return h_; }
    double measure() const noexcept { return domain_.measure(); }

    std::size_t index(int i, int j = 0) const noexcept {
        return dim() == 1 ? static_cast<std::size_t>(i) : static_cast<std::size_t>(i) * n_ + j;
    }

    bool on_boundary(std::size_t node) const noexcept;

    /// Quadrature weight of the node on the boundary surface measure
    /// (1 at the endpoints of an interval, edge trapezoid weights in 2D, 0 inside).
    double boundary_weight(std::size_t node) const noexcept;

private:
    Domain domain_;
    int n_ = 0;
    std::array<double, 2> h_{0.0, 0.0};
    std::vector<Point> nodes_;
    Vector weights_;
    std::vector<double> axis_weights_x_, axis_weights_y_;
};

/// Symmetrized discrete -Laplacian with homogeneous Neumann conditions.
///
/// `stiffness()` is A = W L, where L is the 3-point (1D) or 5-point (2D) stencil
/// with ghost-node reflection folded into the boundary rows and W the lumped
/// quadrature weights. A is symmetric positive semidefinite, has constants in its
/// kernel, and is an M-matrix on every proper principal submatrix.
class NeumannOperator {
public:
    explicit NeumannOperator(const Mesh& mesh);

    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    const Vector& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }

    /// Unsymmetrized stencil L u = W^{-1} A u, i.e. the pointwise -Laplacian.
    Vector apply_laplacian(const Vector& u) const;

private:
    SparseMatrix stiffness_;
    Vector weights_;
};

/// Restriction of the Neumann stiffness to a node subset with zero values
/// imposed on the nodes adjacent to (but outside) the subset.
class DirichletOperator {
public:
    DirichletOperator(const NeumannOperator& op, const std::vector<bool>& mask);

    const SparseMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::size_t>& active() const noexcept { return active_; }
    const std::vector<std::size_t>& boundary() const noexcept { return boundary_; }

private:
    SparseMatrix matrix_;
    std::vector<std::size_t> active_;
    std::vector<std::size_t> boundary_;
};

/// Assembles the Neumann operator for the mesh.
NeumannOperator assemble_neumann_laplacian(const Mesh& mesh);

/// Lumped quadrature: sum_i w_i v_i. Throws ContractError on size mismatch.
double integrate(const Mesh& mesh, const Vector& values);

/// Solves -Lap w = rhs on the masked nodes, w = 0 on the rest.
///
/// Throws ConfigError when the mask is empty or has no discrete boundary
/// (e.g. it covers all of the domain).
Vector solve_dirichlet_poisson(const Mesh& mesh, const std::vector<bool>& mask, const Vector& rhs);

}  // namespace ccn
