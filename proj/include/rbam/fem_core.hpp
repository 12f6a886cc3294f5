#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace rbam {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/**
 * Uniform 1D mesh of [0, s_f] with H interior nodes.
 *
 * Interior node k (1..H) carries degree of freedom k-1; the boundary nodes
 * 0 and H+1 are Dirichlet and never enter the linear algebra.
 */
struct Mesh1D {
    double s_f = 0.0;
    int H = 0;
    double delta_s = 0.0;
    std::vector<double> nodes;  ///< H+2 coordinates, nodes[0] = 0, nodes[H+1] = s_f

    /// Coordinate of interior degree of freedom i (0-based).
    double dof_coordinate(int i) const { return nodes[static_cast<std::size_t>(i) + 1]; }
};

Mesh1D build_mesh(int H, double s_f);

/// Market parameters mu = (K, r, q, sigma).
struct ParameterVector {
    double K = 0.0;      ///< strike
    double r = 0.0;      ///< interest rate
    double q = 0.0;      ///< dividend rate
    double sigma = 0.0;  ///< volatility

    void validate() const;

    friend bool operator==(const ParameterVector&, const ParameterVector&) = default;
};

/// Box of parameters centered at (K0, r0, q0, sigma0) with relative width eps.
struct ParameterBox {
    double K0 = 100.0;
    double r0 = 0.05;
    double q0 = 0.0015;
    double sigma0 = 0.5;
    double eps = 0.1;

    void validate() const;
    ParameterVector lower() const;
    ParameterVector upper() const;
    bool contains(const ParameterVector& mu) const;
};

/**
 * Parameter-separable finite element operators on one mesh.
 *
 * Matrices use the (test row, trial column) convention: (A)_ij = a(phi_j, phi_i).
 * The bilinear form is a(.,.;mu) = sigma^2 A1 + (r - q) A2 + r A3 and the
 * load is f(mu) = K q f1 - K r f2. A1 already contains the factor 1/2.
 */
class AffineOperatorSet {
public:
    using GramFactor = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower, Eigen::NaturalOrdering<int>>;

    AffineOperatorSet(Mesh1D mesh, SparseMatrix X, SparseMatrix mass, SparseMatrix A1,
                      SparseMatrix A2, SparseMatrix A3, Vector f1, Vector f2);

    const Mesh1D& mesh() const { return mesh_; }
    Eigen::Index dim() const { return X_.rows(); }

    const SparseMatrix& X() const { return X_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& A1() const { return A1_; }
    const SparseMatrix& A2() const { return A2_; }
    const SparseMatrix& A3() const { return A3_; }
    const Vector& f1() const { return f1_; }
    const Vector& f2() const { return f2_; }

    SparseMatrix a(const ParameterVector& mu) const;
    Vector f(const ParameterVector& mu) const;

    /// Applies X^{-1} through the stored Cholesky factor.
    Vector solve_gram(const Vector& rhs) const;
    Matrix solve_gram(const Matrix& rhs) const;

private:
    Mesh1D mesh_;
    SparseMatrix X_, mass_, A1_, A2_, A3_;
    Vector f1_, f2_;
    std::shared_ptr<const GramFactor> chol_x_;
};

/// Assembles all operators with 2-point Gauss quadrature per element (exact here).
AffineOperatorSet assemble_operators(const Mesh1D& mesh);

/// Nodal interior values of the payoff, the Dirichlet lift and their difference.
struct ObstacleData {
    Vector psi;        ///< (K - s)_+
    Vector p0;         ///< K (1 - s / s_f)
    Vector psi_tilde;  ///< psi - p0, the obstacle for u
};

ObstacleData obstacle_data(const Mesh1D& mesh, double K);

/// Element of W = V' in the dual basis biorthogonal to the nodal hat functions.
struct DualVector {
    Vector coeffs;

    /// Duality pairing eta(v); a plain dot product because b(phi_i, chi_j) = delta_ij.
    double apply(const Vector& v) const;
    /// Membership in the discrete cone M (all coefficients nonnegative up to tol).
    bool in_cone(double tol = 0.0) const;
};

double v_inner(const Vector& u, const Vector& v, const AffineOperatorSet& ops);
double v_norm(const Vector& v, const AffineOperatorSet& ops);

/// <eta, zeta>_W = eta . X^{-1} zeta.
double w_inner(const DualVector& eta, const DualVector& zeta, const AffineOperatorSet& ops);
double w_norm(const DualVector& eta, const AffineOperatorSet& ops);

/// Riesz representative B xi in V: X (B xi) = xi.
Vector riesz_supremizer(const DualVector& xi, const AffineOperatorSet& ops);

struct Projection {
    Vector coefficients;
    double error_norm = 0.0;
};

/// Largest condition number accepted for a basis Gram matrix.
inline constexpr double kMaxGramCondition = 1e12;

/// V-orthogonal projection of v onto span(basis) via the basis Gram normal equations.
Projection v_project(const Vector& v, const std::vector<Vector>& basis, const AffineOperatorSet& ops);
Projection v_project(const Vector& v, const Matrix& basis, const AffineOperatorSet& ops);

/// Spectral condition number of a symmetric positive semidefinite matrix (inf if singular).
double spd_condition_number(const Matrix& gram);

Matrix columns_to_matrix(const std::vector<Vector>& columns, Eigen::Index rows);

}  // namespace rbam
