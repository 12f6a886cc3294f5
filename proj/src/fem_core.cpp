#include "rbam/fem_core.hpp"

#include "rbam/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rbam {

Mesh1D build_mesh(int H, double s_f) {
    if (H < 2) throw std::invalid_argument("build_mesh: need at least 2 interior nodes, got " + std::to_string(H));
    if (!(s_f > 0.0) || !std::isfinite(s_f)) throw std::invalid_argument("build_mesh: s_f must be positive and finite");

    Mesh1D mesh;
    mesh.s_f = s_f;
    mesh.H = H;
    mesh.delta_s = s_f / static_cast<double>(H + 1);
    mesh.nodes.resize(static_cast<std::size_t>(H) + 2);
    for (int i = 0; i <= H; ++i) mesh.nodes[static_cast<std::size_t>(i)] = i * mesh.delta_s;
    mesh.nodes.back() = s_f;
    return mesh;
}

void ParameterVector::validate() const {
    if (!(K > 0.0) || !std::isfinite(K)) throw std::invalid_argument("parameter K must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("parameter sigma must be positive");
    if (!std::isfinite(r) || !std::isfinite(q)) throw std::invalid_argument("parameters r and q must be finite");
}

void ParameterBox::validate() const {
    if (!(eps >= 0.0) || !std::isfinite(eps)) throw std::invalid_argument("parameter box eps must be >= 0");
    for (double c : {K0, r0, q0, sigma0}) {
        if (!std::isfinite(c)) throw std::invalid_argument("parameter box centers must be finite");
    }
    if (!(K0 > 0.0) || !(sigma0 > 0.0)) throw std::invalid_argument("parameter box needs K0 > 0 and sigma0 > 0");
    if (eps > 2.0) throw std::invalid_argument("parameter box eps > 2 flips the sign of the box");
}

namespace {

// Sorted so that negative centers still give lo <= hi.
std::pair<double, double> interval(double center, double eps) {
    const double a = (1.0 - 0.5 * eps) * center;
    const double b = (1.0 + 0.5 * eps) * center;
    return {std::min(a, b), std::max(a, b)};
}

}  // namespace

ParameterVector ParameterBox::lower() const {
    return {interval(K0, eps).first, interval(r0, eps).first, interval(q0, eps).first,
            interval(sigma0, eps).first};
}

ParameterVector ParameterBox::upper() const {
    return {interval(K0, eps).second, interval(r0, eps).second, interval(q0, eps).second,
            interval(sigma0, eps).second};
}

bool ParameterBox::contains(const ParameterVector& mu) const {
    const auto lo = lower();
    const auto hi = upper();
    return mu.K >= lo.K && mu.K <= hi.K && mu.r >= lo.r && mu.r <= hi.r && mu.q >= lo.q &&
           mu.q <= hi.q && mu.sigma >= lo.sigma && mu.sigma <= hi.sigma;
}

AffineOperatorSet::AffineOperatorSet(Mesh1D mesh, SparseMatrix X, SparseMatrix mass, SparseMatrix A1,
                                     SparseMatrix A2, SparseMatrix A3, Vector f1, Vector f2)
    : mesh_(std::move(mesh)),
      X_(std::move(X)),
      mass_(std::move(mass)),
      A1_(std::move(A1)),
      A2_(std::move(A2)),
      A3_(std::move(A3)),
      f1_(std::move(f1)),
      f2_(std::move(f2)) {
    auto chol = std::make_shared<GramFactor>(X_);
    if (chol->info() != Eigen::Success) throw AssemblyError("Cholesky factorization of the V-Gram matrix failed");
    chol_x_ = std::move(chol);

    GramFactor chol_mass(mass_);
    if (chol_mass.info() != Eigen::Success) throw AssemblyError("Cholesky factorization of the mass matrix failed");
}

SparseMatrix AffineOperatorSet::a(const ParameterVector& mu) const {
    SparseMatrix A = (mu.sigma * mu.sigma) * A1_ + (mu.r - mu.q) * A2_ + mu.r * A3_;
    A.makeCompressed();
    return A;
}

Vector AffineOperatorSet::f(const ParameterVector& mu) const {
    return (mu.K * mu.q) * f1_ - (mu.K * mu.r) * f2_;
}

Vector AffineOperatorSet::solve_gram(const Vector& rhs) const {
    if (rhs.size() != dim()) throw std::invalid_argument("solve_gram: dimension mismatch");
    return chol_x_->solve(rhs);
}

Matrix AffineOperatorSet::solve_gram(const Matrix& rhs) const {
    if (rhs.rows() != dim()) throw std::invalid_argument("solve_gram: dimension mismatch");
    return chol_x_->solve(rhs);
}

AffineOperatorSet assemble_operators(const Mesh1D& mesh) {
    if (mesh.H < 2 || mesh.nodes.size() != static_cast<std::size_t>(mesh.H) + 2) {
        throw std::invalid_argument("assemble_operators: malformed mesh");
    }
    const int H = mesh.H;

    // Gauss-Legendre, 2 points on [-1, 1].
    const double g = 1.0 / std::sqrt(3.0);
    const std::array<double, 2> xi{-g, g};

    using Triplets = std::vector<Eigen::Triplet<double>>;
    Triplets tx, tm, ta1, ta2;
    Vector f1 = Vector::Zero(H);
    Vector f2 = Vector::Zero(H);

    for (int e = 0; e <= H; ++e) {
        const double a = mesh.nodes[static_cast<std::size_t>(e)];
        const double b = mesh.nodes[static_cast<std::size_t>(e) + 1];
        const double h = b - a;
        // Local shape functions: 0 -> node e (decreasing), 1 -> node e+1 (increasing).
        const std::array<int, 2> dof{e - 1, e};
        const std::array<double, 2> dphi{-1.0 / h, 1.0 / h};

        double kx[2][2] = {}, km[2][2] = {}, ka1[2][2] = {}, ka2[2][2] = {};
        double l1[2] = {}, l2[2] = {};
        for (double x : xi) {
            const double s = 0.5 * (a + b) + 0.5 * h * x;
            const double w = 0.5 * h;
            const std::array<double, 2> phi{(b - s) / h, (s - a) / h};
            for (int i = 0; i < 2; ++i) {      // test
                for (int j = 0; j < 2; ++j) {  // trial
                    kx[i][j] += w * (s * s * dphi[j] * dphi[i] + phi[j] * phi[i]);
                    km[i][j] += w * phi[j] * phi[i];
                    // 1/2 <u', (s^2 v)'> with (s^2 v)' = 2 s v + s^2 v'
                    ka1[i][j] += w * 0.5 * dphi[j] * (2.0 * s * phi[i] + s * s * dphi[i]);
                    ka2[i][j] += -w * s * dphi[j] * phi[i];
                }
                l1[i] += w * (s / mesh.s_f) * phi[i];
                l2[i] += w * phi[i];
            }
        }
        for (int i = 0; i < 2; ++i) {
            if (dof[i] < 0 || dof[i] >= H) continue;
            f1[dof[i]] += l1[i];
            f2[dof[i]] += l2[i];
            for (int j = 0; j < 2; ++j) {
                if (dof[j] < 0 || dof[j] >= H) continue;
                tx.emplace_back(dof[i], dof[j], kx[i][j]);
                tm.emplace_back(dof[i], dof[j], km[i][j]);
                ta1.emplace_back(dof[i], dof[j], ka1[i][j]);
                ta2.emplace_back(dof[i], dof[j], ka2[i][j]);
            }
        }
    }

    auto build = [H](const Triplets& t) {
        SparseMatrix m(H, H);
        m.setFromTriplets(t.begin(), t.end());
        m.makeCompressed();
        return m;
    };
    SparseMatrix mass = build(tm);
    SparseMatrix a3 = mass;
    return AffineOperatorSet(mesh, build(tx), std::move(mass), build(ta1), build(ta2), std::move(a3),
                             std::move(f1), std::move(f2));
}

ObstacleData obstacle_data(const Mesh1D& mesh, double K) {
    if (!(K > 0.0)) throw std::invalid_argument("obstacle_data: K must be positive");
    ObstacleData data;
    data.psi.resize(mesh.H);
    data.p0.resize(mesh.H);
    for (int i = 0; i < mesh.H; ++i) {
        const double s = mesh.dof_coordinate(i);
        data.psi[i] = std::max(K - s, 0.0);
        data.p0[i] = K * (1.0 - s / mesh.s_f);
    }
    data.psi_tilde = data.psi - data.p0;
    return data;
}

double DualVector::apply(const Vector& v) const {
    if (v.size() != coeffs.size()) throw std::invalid_argument("DualVector::apply: dimension mismatch");
    return coeffs.dot(v);
}

bool DualVector::in_cone(double tol) const { return coeffs.size() == 0 || coeffs.minCoeff() >= -tol; }

double v_inner(const Vector& u, const Vector& v, const AffineOperatorSet& ops) {
    if (u.size() != ops.dim() || v.size() != ops.dim()) throw std::invalid_argument("v_inner: dimension mismatch");
    return u.dot(ops.X() * v);
}

double v_norm(const Vector& v, const AffineOperatorSet& ops) { return std::sqrt(std::max(v_inner(v, v, ops), 0.0)); }

double w_inner(const DualVector& eta, const DualVector& zeta, const AffineOperatorSet& ops) {
    if (eta.coeffs.size() != ops.dim() || zeta.coeffs.size() != ops.dim()) {
        throw std::invalid_argument("w_inner: dimension mismatch");
    }
    return eta.coeffs.dot(ops.solve_gram(zeta.coeffs));
}

double w_norm(const DualVector& eta, const AffineOperatorSet& ops) {
    return std::sqrt(std::max(w_inner(eta, eta, ops), 0.0));
}

Vector riesz_supremizer(const DualVector& xi, const AffineOperatorSet& ops) {
    if (xi.coeffs.size() != ops.dim()) throw std::invalid_argument("riesz_supremizer: dimension mismatch");
    Vector b = ops.solve_gram(xi.coeffs);
    const double scale = xi.coeffs.lpNorm<Eigen::Infinity>();
    const double residual = (ops.X() * b - xi.coeffs).lpNorm<Eigen::Infinity>();
    if (!(residual <= 1e-10 * scale) && scale > 0.0) {
        throw AssemblyError("riesz_supremizer: Gram solve residual " + std::to_string(residual));
    }
    return b;
}

double spd_condition_number(const Matrix& gram) {
    if (gram.size() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

Matrix columns_to_matrix(const std::vector<Vector>& columns, Eigen::Index rows) {
    Matrix m(rows, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != rows) throw std::invalid_argument("columns_to_matrix: dimension mismatch");
        m.col(static_cast<Eigen::Index>(j)) = columns[j];
    }
    return m;
}

Projection v_project(const Vector& v, const Matrix& basis, const AffineOperatorSet& ops) {
    if (v.size() != ops.dim() || basis.rows() != ops.dim()) throw std::invalid_argument("v_project: dimension mismatch");
    Projection out;
    if (basis.cols() == 0) {
        out.coefficients = Vector(0);
        out.error_norm = v_norm(v, ops);
        return out;
    }
    const Matrix Xb = ops.X() * basis;
    const Matrix gram = basis.transpose() * Xb;
    const double cond = spd_condition_number(gram);
    if (!(cond < kMaxGramCondition)) {
        throw IllConditionedBasis("v_project: basis Gram condition number " + std::to_string(cond));
    }
    out.coefficients = gram.ldlt().solve(Xb.transpose() * v);
    out.error_norm = v_norm(v - basis * out.coefficients, ops);
    return out;
}

Projection v_project(const Vector& v, const std::vector<Vector>& basis, const AffineOperatorSet& ops) {
    return v_project(v, columns_to_matrix(basis, ops.dim()), ops);
}

}  // namespace rbam
