#include "rbam/lcp.hpp"

#include "rbam/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace rbam {

template <typename MatrixType>
BasicLcpProblem<MatrixType>::BasicLcpProblem(MatrixType S, Vector rhs, Vector obstacle)
    : S_(std::move(S)), rhs_(std::move(rhs)), obstacle_(std::move(obstacle)) {
    const Eigen::Index n = rhs_.size();
    if (S_.rows() != n || S_.cols() != n || obstacle_.size() != n) {
        throw std::invalid_argument("LcpProblem: dimension mismatch");
    }
    const Vector diag = S_.diagonal();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(diag[i] > 0.0)) {
            throw std::invalid_argument("LcpProblem: diagonal entry " + std::to_string(i) + " is not positive");
        }
    }
    if (!rhs_.allFinite() || !obstacle_.allFinite()) throw std::invalid_argument("LcpProblem: non-finite data");
}

template class BasicLcpProblem<SparseMatrix>;
template class BasicLcpProblem<Matrix>;

namespace {

using ActiveSet = std::vector<bool>;

struct Partition {
    std::vector<Eigen::Index> free;      // inactive indices
    std::vector<Eigen::Index> position;  // index -> slot in free, or -1
};

Partition partition(const ActiveSet& active) {
    Partition p;
    p.position.assign(active.size(), -1);
    for (std::size_t i = 0; i < active.size(); ++i) {
        if (!active[i]) {
            p.position[i] = static_cast<Eigen::Index>(p.free.size());
            p.free.push_back(static_cast<Eigen::Index>(i));
        }
    }
    return p;
}

// Solves S_II u_I = rhs_I - S_IA obstacle_A with u_A = obstacle_A.
Vector solve_active_system(const SparseMatrix& S, const Vector& rhs, const Vector& obstacle,
                           const ActiveSet& active) {
    const Partition p = partition(active);
    Vector u = obstacle;
    const auto m = static_cast<Eigen::Index>(p.free.size());
    if (m == 0) return u;

    Vector b(m);
    for (Eigen::Index k = 0; k < m; ++k) b[k] = rhs[p.free[static_cast<std::size_t>(k)]];

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(S.nonZeros()));
    for (Eigen::Index col = 0; col < S.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(S, col); it; ++it) {
            const Eigen::Index row_slot = p.position[static_cast<std::size_t>(it.row())];
            if (row_slot < 0) continue;
            const Eigen::Index col_slot = p.position[static_cast<std::size_t>(it.col())];
            if (col_slot < 0) {
                b[row_slot] -= it.value() * obstacle[it.col()];
            } else {
                triplets.emplace_back(row_slot, col_slot, it.value());
            }
        }
    }
    SparseMatrix reduced(m, m);
    reduced.setFromTriplets(triplets.begin(), triplets.end());
    reduced.makeCompressed();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(reduced);
    if (lu.info() != Eigen::Success) throw NumericalBreakdown("solve_lcp: singular active-set system");
    const Vector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) throw NumericalBreakdown("solve_lcp: active-set solve failed");
    for (Eigen::Index k = 0; k < m; ++k) u[p.free[static_cast<std::size_t>(k)]] = x[k];
    return u;
}

Vector solve_active_system(const Matrix& S, const Vector& rhs, const Vector& obstacle, const ActiveSet& active) {
    const Partition p = partition(active);
    Vector u = obstacle;
    const auto m = static_cast<Eigen::Index>(p.free.size());
    if (m == 0) return u;

    Matrix reduced(m, m);
    Vector b(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index i = p.free[static_cast<std::size_t>(k)];
        b[k] = rhs[i];
        for (Eigen::Index j = 0; j < S.cols(); ++j) {
            const Eigen::Index slot = p.position[static_cast<std::size_t>(j)];
            if (slot < 0) {
                b[k] -= S(i, j) * obstacle[j];
            } else {
                reduced(k, slot) = S(i, j);
            }
        }
    }
    Eigen::PartialPivLU<Matrix> lu(reduced);
    if (!(lu.rcond() > 1e-15)) throw NumericalBreakdown("solve_lcp: singular active-set system");
    const Vector x = lu.solve(b);
    if (!x.allFinite()) throw NumericalBreakdown("solve_lcp: active-set solve failed");
    for (Eigen::Index k = 0; k < m; ++k) u[p.free[static_cast<std::size_t>(k)]] = x[k];
    return u;
}

template <typename MatrixType>
LcpSolution pdas(const BasicLcpProblem<MatrixType>& problem, const LcpOptions& options) {
    const Eigen::Index n = problem.size();
    const auto un = static_cast<std::size_t>(n);
    const Vector& psi = problem.obstacle();

    ActiveSet active(un, false);
    if (options.initial_active) {
        if (options.initial_active->size() != un) throw std::invalid_argument("solve_lcp: warm start size mismatch");
        active = *options.initial_active;
    }
    if (!(options.c > 0.0)) throw std::invalid_argument("solve_lcp: c must be positive");

    std::set<ActiveSet> visited;
    bool least_index = false;
    LcpSolution sol;

    for (int it = 1; it <= options.max_iter; ++it) {
        Vector u = solve_active_system(problem.S(), problem.rhs(), psi, active);
        Vector lambda = problem.S() * u - problem.rhs();
        for (std::size_t i = 0; i < un; ++i) {
            if (!active[i]) lambda[static_cast<Eigen::Index>(i)] = 0.0;
        }
        sol.u = std::move(u);
        sol.lambda = std::move(lambda);
        sol.iterations = it;

        ActiveSet next(un, false);
        for (std::size_t i = 0; i < un; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            next[i] = sol.lambda[k] + options.c * (psi[k] - sol.u[k]) > 0.0;
        }
        if (next == active) {
            sol.active = std::move(active);
            sol.used_least_index = least_index;
            return sol;
        }

        if (!least_index && visited.count(next) > 0) least_index = true;
        if (least_index) {
            // Murty's rule: flip the smallest strictly violating index.
            std::optional<std::size_t> flip;
            for (std::size_t i = 0; i < un && !flip; ++i) {
                const auto k = static_cast<Eigen::Index>(i);
                if (active[i] ? sol.lambda[k] < 0.0 : sol.u[k] < psi[k]) flip = i;
            }
            if (!flip) {
                sol.active = std::move(active);
                sol.used_least_index = true;
                return sol;
            }
            next = active;
            next[*flip] = !next[*flip];
        }
        visited.insert(active);
        active = std::move(next);
    }

    const double primal = std::max(0.0, (psi - sol.u).maxCoeff());
    const double dual = sol.lambda.size() > 0 ? std::max(0.0, -sol.lambda.minCoeff()) : 0.0;
    throw SolverDivergence("solve_lcp: active set did not settle after " + std::to_string(options.max_iter) +
                               " iterations (primal violation " + std::to_string(primal) +
                               ", dual violation " + std::to_string(dual) + ")",
                           primal, dual);
}

double inf_norm(const SparseMatrix& S) {
    Vector row_sums = Vector::Zero(S.rows());
    for (Eigen::Index col = 0; col < S.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(S, col); it; ++it) row_sums[it.row()] += std::abs(it.value());
    }
    return row_sums.size() > 0 ? row_sums.maxCoeff() : 0.0;
}

double inf_norm(const Matrix& S) { return S.size() > 0 ? S.cwiseAbs().rowwise().sum().maxCoeff() : 0.0; }

template <typename MatrixType>
LcpResiduals residuals(const BasicLcpProblem<MatrixType>& problem, const Vector& u, const Vector& lambda) {
    if (u.size() != problem.size() || lambda.size() != problem.size()) {
        throw std::invalid_argument("lcp_residuals: dimension mismatch");
    }
    LcpResiduals r;
    if (u.size() == 0) return r;
    const Vector res = problem.S() * u - lambda - problem.rhs();
    const double scale = inf_norm(problem.S()) * u.lpNorm<Eigen::Infinity>() + problem.rhs().template lpNorm<Eigen::Infinity>();
    r.linear = scale > 0.0 ? res.lpNorm<Eigen::Infinity>() / scale : res.lpNorm<Eigen::Infinity>();
    const Vector gap = u - problem.obstacle();
    r.min_gap = gap.minCoeff();
    r.min_lambda = lambda.minCoeff();
    r.complementarity = std::abs(lambda.dot(gap)) /
                        (1.0 + u.lpNorm<Eigen::Infinity>() * lambda.lpNorm<Eigen::Infinity>());
    return r;
}

}  // namespace

LcpSolution solve_lcp(const LcpProblem& problem, const LcpOptions& options) { return pdas(problem, options); }

LcpSolution solve_lcp(const DenseLcpProblem& problem, const LcpOptions& options) { return pdas(problem, options); }

LcpResiduals lcp_residuals(const LcpProblem& problem, const Vector& u, const Vector& lambda) {
    return residuals(problem, u, lambda);
}

LcpResiduals lcp_residuals(const DenseLcpProblem& problem, const Vector& u, const Vector& lambda) {
    return residuals(problem, u, lambda);
}

}  // namespace rbam
