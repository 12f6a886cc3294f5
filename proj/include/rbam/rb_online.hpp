#pragma once

#include "rbam/fem_core.hpp"
#include "rbam/lcp.hpp"
#include "rbam/rb_offline.hpp"
#include "rbam/vi_truth.hpp"

#include <string>
#include <vector>

namespace rbam {

/**
 * Per-parameter reduced data. Everything here is N_V / N_W sized except the
 * one O(H) pass over psi_tilde(mu) for g_N and u0_N, since the obstacle has a
 * K-dependent kink and no affine expansion.
 */
struct OnlineData {
    ParameterVector mu;
    SchemeConfig config;
    Matrix A_N;    ///< sigma^2 A1_N + (r - q) A2_N + r A3_N
    Vector f_N;    ///< K q f1_N - K r f2_N
    Matrix S_N;    ///< Mass_N / dt + theta A_N
    Matrix R_N;    ///< Mass_N / dt - (1 - theta) A_N
    Vector g_N;    ///< (g_N)_j = xi_j . psi_tilde(mu)
    Vector u0_N;   ///< V-projection of psi_tilde(mu) onto V_N
    Eigen::PartialPivLU<Matrix> S_lu;
    Matrix Z;      ///< S_N^{-1} B_N
    Matrix schur;  ///< B_N^T S_N^{-1} B_N
};

OnlineData online_setup(const ReducedModel& model, const ParameterVector& mu, const SchemeConfig& config);
OnlineData online_setup(const ReducedModel& model, const ParameterVector& mu);

struct ReducedStep {
    Vector uN;
    Vector alpha;  ///< cone coefficients, lambda_N = sum_j alpha_j xi_j
    LcpSolution lcp;
};

/**
 * One reduced theta-step. Eliminates u = S_N^{-1}(rhs + B_N alpha) and solves the
 * N_W-dimensional LCP  alpha >= 0,  w = schur alpha + B_N^T S_N^{-1} rhs - g_N >= 0,
 * alpha . w = 0. Cost is independent of H.
 */
ReducedStep reduced_step(const Vector& uN_prev, const OnlineData& data, const ReducedModel& model,
                         const LcpOptions& lcp = {});

struct ReducedTrajectory {
    ParameterVector mu;
    SchemeConfig config;
    std::vector<Vector> uN;     ///< uN[0..L]
    std::vector<Vector> alpha;  ///< alpha[n-1] for step n = 1..L
    std::vector<int> iterations;
};

ReducedTrajectory reduced_trajectory(const ReducedModel& model, const ParameterVector& mu, const SchemeConfig& config);
ReducedTrajectory reduced_trajectory(const ReducedModel& model, const ParameterVector& mu);

struct ReducedCheck {
    double min_alpha = 0.0;
    double min_slack = 0.0;            ///< min_j (B_N^T u - g_N)_j / (1 + |g_N|_inf)
    double max_complementarity = 0.0;  ///< |alpha . w| / (1 + |alpha|_inf |w|_inf)
    bool ok = true;
};

ReducedCheck check_reduced_trajectory(const ReducedTrajectory& rt, const ReducedModel& model, const OnlineData& data);

/// Nodal interior values reconstructed from a reduced trajectory.
struct NodalTrajectory {
    std::vector<Vector> u;       ///< psi uN
    std::vector<Vector> price;   ///< u + P0(K)
    std::vector<Vector> lambda;  ///< xi alpha, steps 1..L
};

NodalTrajectory reconstruct(const ReducedModel& model, const ReducedTrajectory& rt, double K, const Mesh1D& mesh);

/// sqrt(dt * sum_{n=0..L} |u^n - u_N^n|_V^2).
double error_norm(const std::vector<Vector>& truth_u, const std::vector<Vector>& reduced_u,
                  const AffineOperatorSet& ops, const SchemeConfig& config);
double error_norm(const Trajectory& truth, const NodalTrajectory& reduced, const AffineOperatorSet& ops);

struct ErrorReport {
    std::vector<ParameterVector> test_params;
    std::vector<double> err;
    std::vector<bool> out_of_box;
    double err_linf = 0.0;
    int NV_tilde = 0;
    int NW = 0;
    int NV = 0;
};

/// Runs truth and reduced model on every test parameter and collects err_N(mu) and its maximum.
ErrorReport err_linf(const ReducedModel& model, const std::vector<ParameterVector>& test_set,
                     const AffineOperatorSet& ops, const ParameterBox* box = nullptr);

/// Columns K, r, q, sigma, err_N, then a final ERR_LINF row.
void write_error_report_csv(const std::string& path, const ErrorReport& report);

}  // namespace rbam
