#include "rbam/errors.hpp"
#include "rbam/lcp.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace rbam;

namespace {

SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(); }

SparseMatrix tridiagonal(int n, double diag, double off) {
    SparseMatrix S(n, n);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < n; ++i) {
        t.emplace_back(i, i, diag);
        if (i + 1 < n) {
            t.emplace_back(i, i + 1, off);
            t.emplace_back(i + 1, i, off);
        }
    }
    S.setFromTriplets(t.begin(), t.end());
    return S;
}

}  // namespace

TEST(Lcp, FarObstacleGivesUnconstrainedSolve) {
    const SparseMatrix S = tridiagonal(10, 4.0, -1.0);
    const Vector rhs = Vector::LinSpaced(10, -1.0, 2.0);
    const LcpSolution sol = solve_lcp(LcpProblem(S, rhs, Vector::Constant(10, -1e6)));
    const Vector expected = Matrix(S).lu().solve(rhs);
    EXPECT_LE((sol.u - expected).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(sol.lambda, Vector::Zero(10));
    EXPECT_EQ(sol.iterations, 1);
}

TEST(Lcp, FullyActiveConstruction) {
    const SparseMatrix S = tridiagonal(10, 4.0, -1.0);
    const Vector obstacle = Vector::LinSpaced(10, -3.0, 3.0);
    const Vector rhs = S * obstacle - Vector::Ones(10);
    const LcpSolution sol = solve_lcp(LcpProblem(S, rhs, obstacle));
    EXPECT_LE((sol.u - obstacle).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((sol.lambda - Vector::Ones(10)).cwiseAbs().maxCoeff(), 1e-12);
    for (bool a : sol.active) EXPECT_TRUE(a);
}

TEST(Lcp, RandomSpdMatchesEnumeration) {
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 10;
        const Matrix S = oracle::random_spd(rng, n);
        const Vector rhs = oracle::random_vector(rng, n);
        const Vector obstacle = oracle::random_vector(rng, n, -0.5, 0.5);
        const auto found = oracle::enumerate_lcp(S, rhs, obstacle);
        ASSERT_EQ(found.size(), 1u) << "trial " << trial;
        for (const LcpSolution& sol :
             {solve_lcp(DenseLcpProblem(S, rhs, obstacle)), solve_lcp(LcpProblem(to_sparse(S), rhs, obstacle))}) {
            EXPECT_EQ(sol.active, found[0].active) << "trial " << trial;
            EXPECT_LE((sol.u - found[0].u).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
            EXPECT_LE((sol.lambda - found[0].lambda).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
        }
    }
}

TEST(Lcp, NonsymmetricPMatrixMatchesEnumeration) {
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 8;
        Matrix R(n, n);
        for (int i = 0; i < n; ++i) R.col(i) = oracle::random_vector(rng, n);
        // A skew-symmetric perturbation leaves the SPD symmetric part, so S stays a P-matrix.
        const Matrix S = oracle::random_spd(rng, n) + (R - R.transpose());
        const Vector rhs = oracle::random_vector(rng, n);
        const Vector obstacle = oracle::random_vector(rng, n, -0.5, 0.5);
        const auto found = oracle::enumerate_lcp(S, rhs, obstacle);
        ASSERT_EQ(found.size(), 1u);
        const LcpSolution sol = solve_lcp(DenseLcpProblem(S, rhs, obstacle));
        EXPECT_EQ(sol.active, found[0].active);
        EXPECT_LE((sol.u - found[0].u).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Lcp, SolutionSatisfiesContract) {
    std::mt19937_64 rng(103);
    const Matrix S = oracle::random_spd(rng, 12);
    const Vector rhs = oracle::random_vector(rng, 12);
    const Vector obstacle = oracle::random_vector(rng, 12, -0.5, 0.5);
    const DenseLcpProblem problem(S, rhs, obstacle);
    const LcpSolution sol = solve_lcp(problem);
    const LcpResiduals r = lcp_residuals(problem, sol.u, sol.lambda);
    EXPECT_LE(r.linear, 1e-10);
    EXPECT_GE(r.min_gap, -1e-11);
    EXPECT_GE(r.min_lambda, 0.0);
    for (int i = 0; i < 12; ++i) {
        if (sol.active[static_cast<std::size_t>(i)]) {
            EXPECT_EQ(sol.u[i], obstacle[i]);
        } else {
            EXPECT_EQ(sol.lambda[i], 0.0);
        }
    }
}

TEST(Lcp, WarmStartAtSolutionTakesOneSweep) {
    std::mt19937_64 rng(104);
    const Matrix S = oracle::random_spd(rng, 9);
    const Vector rhs = oracle::random_vector(rng, 9);
    const Vector obstacle = oracle::random_vector(rng, 9, -0.5, 0.5);
    const DenseLcpProblem problem(S, rhs, obstacle);
    const LcpSolution cold = solve_lcp(problem);
    LcpOptions warm;
    warm.initial_active = cold.active;
    const LcpSolution hot = solve_lcp(problem, warm);
    EXPECT_EQ(hot.iterations, 1);
    EXPECT_EQ(hot.u, cold.u);
}

TEST(Lcp, IterationBudgetExhaustedRaisesDivergence) {
    const SparseMatrix S = tridiagonal(10, 4.0, -1.0);
    const Vector obstacle = Vector::Zero(10);
    const Vector rhs = -Vector::Ones(10);
    LcpOptions opts;
    opts.max_iter = 1;
    try {
        solve_lcp(LcpProblem(S, rhs, obstacle), opts);
        FAIL() << "expected divergence";
    } catch (const SolverDivergence& e) {
        EXPECT_GT(e.primal_violation(), 0.0);
    }
}

TEST(Lcp, InvalidProblemsRejected) {
    Matrix S = Matrix::Identity(3, 3);
    S(1, 1) = 0.0;
    EXPECT_THROW(DenseLcpProblem(S, Vector::Zero(3), Vector::Zero(3)), std::invalid_argument);
    EXPECT_THROW(DenseLcpProblem(Matrix::Identity(3, 3), Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
    Vector bad = Vector::Zero(3);
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(DenseLcpProblem(Matrix::Identity(3, 3), bad, Vector::Zero(3)), std::invalid_argument);
}

TEST(Lcp, SingularFreeBlockRaisesBreakdown) {
    // Positive diagonal but singular: the free block [[1,1],[1,1]] cannot be solved.
    const Matrix S = (Matrix(2, 2) << 1.0, 1.0, 1.0, 1.0).finished();
    EXPECT_THROW(solve_lcp(DenseLcpProblem(S, Vector::Ones(2), Vector::Constant(2, -10.0))), NumericalBreakdown);
}
