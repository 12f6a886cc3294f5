#pragma once

#include "rbam/fem_core.hpp"

#include <optional>
#include <vector>

namespace rbam {

/**
 * Linear complementarity problem in obstacle form:
 *
 *     S u - lambda = rhs,   u >= obstacle,   lambda >= 0,   lambda . (u - obstacle) = 0.
 *
 * S may be nonsymmetric but must have a positive diagonal (checked here).
 */
template <typename MatrixType>
class BasicLcpProblem {
public:
    BasicLcpProblem(MatrixType S, Vector rhs, Vector obstacle);

    const MatrixType& S() const { return S_; }
    const Vector& rhs() const { return rhs_; }
    const Vector& obstacle() const { return obstacle_; }
    Eigen::Index size() const { return rhs_.size(); }

private:
    MatrixType S_;
    Vector rhs_;
    Vector obstacle_;
};

using LcpProblem = BasicLcpProblem<SparseMatrix>;
using DenseLcpProblem = BasicLcpProblem<Matrix>;

extern template class BasicLcpProblem<SparseMatrix>;
extern template class BasicLcpProblem<Matrix>;

struct LcpOptions {
    int max_iter = 100;
    double c = 1.0;
    /// Warm start; empty means start from the unconstrained solve.
    std::optional<std::vector<bool>> initial_active;
};

struct LcpSolution {
    Vector u;
    Vector lambda;
    std::vector<bool> active;
    int iterations = 0;
    /// True when a revisited active set forced single-index (least-index) updates.
    bool used_least_index = false;
};

/**
 * Primal-dual active set iteration.
 *
 * Each sweep fixes u = obstacle on the active set and lambda = 0 elsewhere,
 * solves the remaining linear system and updates
 * A <- { i : lambda_i + c (obstacle_i - u_i) > 0 }. Stops when A repeats.
 * If an earlier active set comes back (a cycle, possible for matrices that
 * are not M-matrices) the update switches to flipping only the smallest
 * violating index, which terminates for P-matrices.
 */
LcpSolution solve_lcp(const LcpProblem& problem, const LcpOptions& options = {});
LcpSolution solve_lcp(const DenseLcpProblem& problem, const LcpOptions& options = {});

/// Residual diagnostics of a candidate LCP solution.
struct LcpResiduals {
    double linear = 0.0;           ///< |S u - lambda - rhs|_inf / (|S|_inf |u|_inf + |rhs|_inf)
    double min_gap = 0.0;          ///< min(u - obstacle)
    double min_lambda = 0.0;       ///< min(lambda)
    double complementarity = 0.0;  ///< |lambda . (u - obstacle)| / (1 + |u|_inf |lambda|_inf)
};

LcpResiduals lcp_residuals(const LcpProblem& problem, const Vector& u, const Vector& lambda);
LcpResiduals lcp_residuals(const DenseLcpProblem& problem, const Vector& u, const Vector& lambda);

}  // namespace rbam
