#include "rbam/errors.hpp"
#include "rbam/fem_core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace rbam;

namespace {

// Entries integrated symbolically on the mesh {0, 1, 2, 3} (H = 2, s_f = 3).
const Matrix& symbolic_X() {
    static const Matrix m = (Matrix(2, 2) << 10.0 / 3.0, -13.0 / 6.0, -13.0 / 6.0, 28.0 / 3.0).finished();
    return m;
}
const Matrix& symbolic_mass() {
    static const Matrix m = (Matrix(2, 2) << 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0).finished();
    return m;
}
const Matrix& symbolic_A1() {
    static const Matrix m = (Matrix(2, 2) << 1.0, -0.5, -2.0, 4.0).finished();
    return m;
}
const Matrix& symbolic_A2() {
    static const Matrix m = (Matrix(2, 2) << 1.0 / 3.0, -2.0 / 3.0, 5.0 / 6.0, 1.0 / 3.0).finished();
    return m;
}

double rel_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

const AffineOperatorSet& standard_ops() {
    static const AffineOperatorSet ops = assemble_operators(build_mesh(99, 300.0));
    return ops;
}

}  // namespace

TEST(Mesh, StandardGridSpacing) {
    const Mesh1D mesh = build_mesh(99, 300.0);
    EXPECT_DOUBLE_EQ(mesh.delta_s, 3.0);
    EXPECT_EQ(mesh.nodes.size(), 101u);
    EXPECT_DOUBLE_EQ(mesh.nodes[50], 150.0);
    EXPECT_DOUBLE_EQ(mesh.nodes.front(), 0.0);
    EXPECT_DOUBLE_EQ(mesh.nodes.back(), 300.0);
    EXPECT_NEAR(mesh.delta_s * (mesh.H + 1), mesh.s_f, 1e-12 * mesh.s_f);
    for (std::size_t i = 1; i < mesh.nodes.size(); ++i) EXPECT_GT(mesh.nodes[i], mesh.nodes[i - 1]);
}

TEST(Mesh, TinyGridNodes) {
    const Mesh1D mesh = build_mesh(2, 3.0);
    ASSERT_EQ(mesh.nodes.size(), 4u);
    for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(mesh.nodes[static_cast<std::size_t>(i)], i);
    EXPECT_DOUBLE_EQ(mesh.dof_coordinate(0), 1.0);
}

TEST(Mesh, RejectsInvalidInput) {
    EXPECT_THROW(build_mesh(1, 3.0), std::invalid_argument);
    EXPECT_THROW(build_mesh(10, 0.0), std::invalid_argument);
    EXPECT_THROW(build_mesh(10, -1.0), std::invalid_argument);
}

TEST(Assembly, MatchesSymbolicIntegration) {
    const AffineOperatorSet ops = assemble_operators(build_mesh(2, 3.0));
    EXPECT_LE(rel_diff(Matrix(ops.X()), symbolic_X()), 1e-13);
    EXPECT_LE(rel_diff(Matrix(ops.mass()), symbolic_mass()), 1e-13);
    EXPECT_LE(rel_diff(Matrix(ops.A1()), symbolic_A1()), 1e-13);
    EXPECT_LE(rel_diff(Matrix(ops.A2()), symbolic_A2()), 1e-13);
    EXPECT_NEAR(ops.f1()[0], 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(ops.f1()[1], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(ops.f2()[0], 1.0, 1e-15);
    EXPECT_NEAR(ops.f2()[1], 1.0, 1e-15);
}

TEST(Assembly, ConvectionRowSumsMatchSymbolicValue) {
    const AffineOperatorSet ops = assemble_operators(build_mesh(2, 3.0));
    const Vector row_sums = ops.A2() * Vector::Ones(2);
    EXPECT_NEAR(row_sums[0], -1.0 / 3.0, 1e-14);
    EXPECT_NEAR(row_sums[1], 7.0 / 6.0, 1e-14);
}

TEST(Assembly, ReactionEqualsMass) {
    const AffineOperatorSet& ops = standard_ops();
    EXPECT_EQ(Matrix(ops.A3()), Matrix(ops.mass()));
}

TEST(Assembly, MassEntriesClosedForm) {
    const AffineOperatorSet& ops = standard_ops();
    const Matrix M(ops.mass());
    const double ds = 3.0;
    for (int i = 0; i < 99; ++i) {
        EXPECT_NEAR(M(i, i), 2.0 * ds / 3.0, 1e-13);
        if (i + 1 < 99) {
            EXPECT_NEAR(M(i, i + 1), ds / 6.0, 1e-13);
            EXPECT_NEAR(M(i + 1, i), ds / 6.0, 1e-13);
        }
    }
}

TEST(Assembly, TridiagonalAndSymmetricGram) {
    const AffineOperatorSet& ops = standard_ops();
    for (const SparseMatrix* m : {&ops.X(), &ops.mass(), &ops.A1(), &ops.A2(), &ops.A3()}) {
        for (Eigen::Index col = 0; col < m->outerSize(); ++col) {
            for (SparseMatrix::InnerIterator it(*m, col); it; ++it) EXPECT_LE(std::abs(it.row() - it.col()), 1);
        }
    }
    const Matrix X(ops.X());
    EXPECT_EQ(X, X.transpose());
    Eigen::LLT<Matrix> llt(X);
    EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Assembly, GramFactorizesAcrossMeshSizes) {
    for (int H : {2, 3, 10, 99, 1000, 10000}) {
        EXPECT_NO_THROW(assemble_operators(build_mesh(H, 300.0))) << "H=" << H;
    }
}

TEST(Assembly, AffineCombination) {
    const AffineOperatorSet& ops = standard_ops();
    const ParameterVector mu{100.0, 0.05, 0.0015, 0.5};
    const Matrix expected = 0.25 * Matrix(ops.A1()) + (0.05 - 0.0015) * Matrix(ops.A2()) + 0.05 * Matrix(ops.A3());
    EXPECT_LE((Matrix(ops.a(mu)) - expected).cwiseAbs().maxCoeff(), 1e-12);
    const Vector f_expected = 100.0 * 0.0015 * ops.f1() - 100.0 * 0.05 * ops.f2();
    EXPECT_LE((ops.f(mu) - f_expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Obstacle, NodalValues) {
    const Mesh1D mesh = build_mesh(99, 300.0);
    const ObstacleData ob = obstacle_data(mesh, 100.0);
    // s = 150 is dof 49, s = 90 is dof 29.
    EXPECT_DOUBLE_EQ(ob.psi[49], 0.0);
    EXPECT_DOUBLE_EQ(ob.p0[49], 50.0);
    EXPECT_DOUBLE_EQ(ob.psi_tilde[49], -50.0);
    EXPECT_DOUBLE_EQ(ob.psi_tilde[29], -60.0);
    EXPECT_GE(ob.psi.minCoeff(), 0.0);
}

TEST(Obstacle, StrikeAtDomainEndVanishes) {
    const Mesh1D mesh = build_mesh(99, 300.0);
    const ObstacleData ob = obstacle_data(mesh, 300.0);
    EXPECT_LE(ob.psi_tilde.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DualVector, PairingIsBiorthogonal) {
    const int H = 7;
    for (int i = 0; i < H; ++i) {
        for (int j = 0; j < H; ++j) {
            const DualVector chi{Vector::Unit(H, j)};
            EXPECT_EQ(chi.apply(Vector::Unit(H, i)), i == j ? 1.0 : 0.0);
        }
    }
}

TEST(DualVector, ConeMembership) {
    EXPECT_TRUE((DualVector{Vector::Ones(4)}.in_cone()));
    Vector v = Vector::Ones(4);
    v[2] = -1e-3;
    EXPECT_FALSE(DualVector{v}.in_cone());
    EXPECT_TRUE(DualVector{v}.in_cone(1e-2));
}

TEST(WInner, IdentityGramGivesDotProduct) {
    const Mesh1D mesh = build_mesh(5, 6.0);
    SparseMatrix I(5, 5);
    I.setIdentity();
    const AffineOperatorSet ops(mesh, I, I, I, I, I, Vector::Zero(5), Vector::Zero(5));
    std::mt19937_64 rng(3);
    const DualVector a{random_vector(rng, 5)};
    const DualVector b{random_vector(rng, 5)};
    EXPECT_NEAR(w_inner(a, b, ops), a.coeffs.dot(b.coeffs), 1e-14);
    EXPECT_LE((riesz_supremizer(a, ops) - a.coeffs).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WInner, PositiveDefinite) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(4);
    EXPECT_EQ(w_inner(DualVector{Vector::Zero(99)}, DualVector{Vector::Zero(99)}, ops), 0.0);
    for (int k = 0; k < 20; ++k) {
        const DualVector e{random_vector(rng, 99)};
        EXPECT_GT(w_inner(e, e, ops), 0.0);
    }
}

TEST(WInner, SymmetricBilinearCauchySchwarz) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(5);
    for (int k = 0; k < 100; ++k) {
        const DualVector a{random_vector(rng, 99)};
        const DualVector b{random_vector(rng, 99)};
        const DualVector c{random_vector(rng, 99)};
        const double ab = w_inner(a, b, ops);
        const double scale = w_norm(a, ops) * w_norm(b, ops);
        EXPECT_NEAR(ab, w_inner(b, a, ops), 1e-10 * scale);
        EXPECT_LE(std::abs(ab), scale * (1.0 + 1e-10));
        const DualVector combo{2.0 * a.coeffs - 3.0 * c.coeffs};
        const double lin = 2.0 * ab - 3.0 * w_inner(c, b, ops);
        EXPECT_NEAR(w_inner(combo, b, ops), lin, 1e-10 * (std::abs(lin) + scale + w_norm(c, ops) * w_norm(b, ops)));
    }
}

TEST(WInner, DimensionMismatchRejected) {
    const AffineOperatorSet& ops = standard_ops();
    EXPECT_THROW(w_inner(DualVector{Vector::Ones(98)}, DualVector{Vector::Ones(99)}, ops), std::invalid_argument);
}

TEST(WInner, SupremumDefinitionOracle) {
    const AffineOperatorSet& ops = standard_ops();
    const Matrix X(ops.X());
    const Eigen::LDLT<Matrix> dense(X);
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 3; ++trial) {
        const DualVector eta{random_vector(rng, 99)};
        const double norm = w_norm(eta, ops);
        for (int k = 0; k < 10000; ++k) {
            const Vector v = random_vector(rng, 99);
            const double ratio = eta.apply(v) / std::sqrt(v.dot(X * v));
            ASSERT_LE(ratio, norm * (1.0 + 1e-12));
        }
        const Vector maximizer = dense.solve(eta.coeffs);
        const double attained = eta.apply(maximizer) / std::sqrt(maximizer.dot(X * maximizer));
        EXPECT_NEAR(attained, norm, 1e-10 * norm);
    }
}

TEST(Supremizer, SolvesGramSystemAndIsIsometric) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(7);
    for (int k = 0; k < 100; ++k) {
        const DualVector xi{random_vector(rng, 99)};
        const Vector b = riesz_supremizer(xi, ops);
        EXPECT_LE((ops.X() * b - xi.coeffs).lpNorm<Eigen::Infinity>(), 1e-10 * xi.coeffs.lpNorm<Eigen::Infinity>());
        const double wn = w_norm(xi, ops);
        EXPECT_NEAR(v_norm(b, ops), wn, 1e-10 * wn);
        EXPECT_NEAR(xi.apply(b), wn * wn, 1e-10 * wn * wn);
    }
}

TEST(Supremizer, UnitDualVectorGivesGramInverseColumn) {
    const AffineOperatorSet& ops = standard_ops();
    const Vector col = riesz_supremizer(DualVector{Vector::Unit(99, 5)}, ops);
    const Vector back = ops.X() * col;
    EXPECT_LE((back - Vector::Unit(99, 5)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Projection, MemberHasZeroError) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(8);
    std::vector<Vector> basis;
    for (int k = 0; k < 4; ++k) basis.push_back(random_vector(rng, 99));
    const Projection p = v_project(basis[2], basis, ops);
    EXPECT_LE(p.error_norm, 1e-12 * v_norm(basis[2], ops));
}

TEST(Projection, EmptyBasisKeepsNorm) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(9);
    const Vector v = random_vector(rng, 99);
    const Projection p = v_project(v, std::vector<Vector>{}, ops);
    EXPECT_NEAR(p.error_norm, v_norm(v, ops), 1e-12 * v_norm(v, ops));
    EXPECT_EQ(p.coefficients.size(), 0);
}

TEST(Projection, ResidualIsOrthogonalToBasis) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(10);
    std::vector<Vector> basis;
    for (int k = 0; k < 6; ++k) basis.push_back(random_vector(rng, 99));
    const Vector v = random_vector(rng, 99);
    const Projection p = v_project(v, basis, ops);
    Vector residual = v;
    for (std::size_t k = 0; k < basis.size(); ++k) residual -= p.coefficients[static_cast<Eigen::Index>(k)] * basis[k];
    EXPECT_NEAR(v_norm(residual, ops), p.error_norm, 1e-10 * v_norm(v, ops));
    for (const Vector& b : basis) {
        EXPECT_LE(std::abs(v_inner(residual, b, ops)), 1e-10 * v_norm(v, ops) * v_norm(b, ops));
    }
}

TEST(Projection, DependentBasisRejected) {
    const AffineOperatorSet& ops = standard_ops();
    std::mt19937_64 rng(11);
    const Vector a = random_vector(rng, 99);
    std::vector<Vector> basis{a, 2.0 * a};
    EXPECT_THROW(v_project(a, basis, ops), IllConditionedBasis);
}
