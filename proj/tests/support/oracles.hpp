#pragma once

// Brute-force reference solvers shared by the unit and acceptance tests.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct LcpCandidate {
    std::vector<bool> active;
    Vector u;
    Vector lambda;
};

/// Every active set A whose linear solve (u = obstacle on A, lambda = 0 off A)
/// is feasible: u >= obstacle - tol and lambda >= -tol.
inline std::vector<LcpCandidate> enumerate_lcp(const Matrix& S, const Vector& rhs, const Vector& obstacle,
                                               double tol = 1e-12) {
    const auto n = static_cast<int>(rhs.size());
    std::vector<LcpCandidate> found;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<int> free;
        for (int i = 0; i < n; ++i) {
            if (!(mask & (1u << i))) free.push_back(i);
        }
        Vector u = obstacle;
        if (!free.empty()) {
            const auto m = static_cast<Eigen::Index>(free.size());
            Matrix Sff(m, m);
            Vector b(m);
            for (Eigen::Index a = 0; a < m; ++a) {
                b[a] = rhs[free[static_cast<std::size_t>(a)]];
                for (int j = 0; j < n; ++j) {
                    if (mask & (1u << j)) b[a] -= S(free[static_cast<std::size_t>(a)], j) * obstacle[j];
                }
                for (Eigen::Index c = 0; c < m; ++c) Sff(a, c) = S(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(c)]);
            }
            const Vector x = Sff.fullPivLu().solve(b);
            for (Eigen::Index a = 0; a < m; ++a) u[free[static_cast<std::size_t>(a)]] = x[a];
        }
        Vector lambda = S * u - rhs;
        bool ok = true;
        std::vector<bool> active(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            active[static_cast<std::size_t>(i)] = (mask & (1u << i)) != 0;
            if (active[static_cast<std::size_t>(i)]) {
                ok = ok && lambda[i] >= -tol;
            } else {
                lambda[i] = 0.0;
                ok = ok && u[i] >= obstacle[i] - tol;
            }
        }
        if (ok) found.push_back({active, u, lambda});
    }
    return found;
}

struct MixedCandidate {
    std::vector<bool> active;
    Vector u;
    Vector alpha;
};

/// Solutions of  S u - B alpha = rhs,  B^T u >= g,  alpha >= 0,  alpha . (B^T u - g) = 0
/// by enumerating which constraints hold with equality (full saddle-point solve per set).
inline std::vector<MixedCandidate> enumerate_mixed(const Matrix& S, const Matrix& B, const Vector& rhs, const Vector& g,
                                                   double tol = 1e-10) {
    const auto nv = S.rows();
    const auto nw = static_cast<int>(B.cols());
    std::vector<MixedCandidate> found;
    for (std::uint32_t mask = 0; mask < (1u << nw); ++mask) {
        std::vector<int> act;
        for (int j = 0; j < nw; ++j) {
            if (mask & (1u << j)) act.push_back(j);
        }
        const auto m = static_cast<Eigen::Index>(act.size());
        Matrix K = Matrix::Zero(nv + m, nv + m);
        Vector b = Vector::Zero(nv + m);
        K.topLeftCorner(nv, nv) = S;
        b.head(nv) = rhs;
        for (Eigen::Index a = 0; a < m; ++a) {
            K.block(0, nv + a, nv, 1) = -B.col(act[static_cast<std::size_t>(a)]);
            K.block(nv + a, 0, 1, nv) = B.col(act[static_cast<std::size_t>(a)]).transpose();
            b[nv + a] = g[act[static_cast<std::size_t>(a)]];
        }
        Eigen::FullPivLU<Matrix> lu(K);
        if (!lu.isInvertible()) continue;
        const Vector x = lu.solve(b);
        const Vector u = x.head(nv);
        Vector alpha = Vector::Zero(nw);
        for (Eigen::Index a = 0; a < m; ++a) alpha[act[static_cast<std::size_t>(a)]] = x[nv + a];
        const Vector slack = B.transpose() * u - g;
        const double scale = 1.0 + g.lpNorm<Eigen::Infinity>();
        bool ok = true;
        std::vector<bool> active(static_cast<std::size_t>(nw));
        for (int j = 0; j < nw; ++j) {
            active[static_cast<std::size_t>(j)] = (mask & (1u << j)) != 0;
            ok = ok && (active[static_cast<std::size_t>(j)] ? alpha[j] >= -tol : slack[j] >= -tol * scale);
        }
        if (ok) found.push_back({active, u, alpha});
    }
    return found;
}

/// Random SPD matrix B^T B + shift I with entries of B uniform in [-1, 1].
inline Matrix random_spd(std::mt19937_64& rng, Eigen::Index n, double shift = 0.5) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix B(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) B(i, j) = dist(rng);
    }
    return B.transpose() * B + shift * Matrix::Identity(n, n);
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

}  // namespace oracle
