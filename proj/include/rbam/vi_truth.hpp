#pragma once

#include "rbam/fem_core.hpp"
#include "rbam/lcp.hpp"

#include <string>
#include <vector>

namespace rbam {

/// Uniform theta-scheme in backward time on [0, T] with L steps.
struct SchemeConfig {
    double T = 1.0;
    int L = 20;
    double theta = 0.5;

    double delta_t() const { return T / static_cast<double>(L); }
    double time(int n) const { return n * delta_t(); }
    void validate() const;

    friend bool operator==(const SchemeConfig&, const SchemeConfig&) = default;
};

/// Full-order solution for one parameter.
struct Trajectory {
    ParameterVector mu;
    SchemeConfig config;
    std::vector<Vector> u;       ///< u[0..L]
    std::vector<Vector> lambda;  ///< lambda[n-1] holds the multiplier of step n = 1..L
    std::vector<int> iterations; ///< active-set sweeps per step
    std::vector<LcpResiduals> residuals;

    const Vector& multiplier(int n) const { return lambda.at(static_cast<std::size_t>(n) - 1); }
};

/// Feasibility thresholds used for trajectory checks.
struct TruthTolerances {
    double gap = 1e-9;
    double lambda = 1e-12;
    double complementarity = 1e-9;
    double linear = 1e-10;
};

struct StepResult {
    Vector u;
    Vector lambda;
    LcpSolution lcp;
    LcpResiduals residuals;
};

/**
 * One theta-scheme step: builds
 *   S   = M / dt + theta A(mu)
 *   rhs = (M / dt - (1 - theta) A(mu)) u_prev + f(mu)
 * and solves the obstacle LCP with obstacle psi_tilde.
 */
StepResult theta_step(const Vector& u_prev, const ParameterVector& mu, const AffineOperatorSet& ops,
                      const ObstacleData& obstacle, const SchemeConfig& config, const LcpOptions& lcp = {});

Trajectory solve_trajectory(const ParameterVector& mu, const AffineOperatorSet& ops, const ObstacleData& obstacle,
                            const SchemeConfig& config);
Trajectory solve_trajectory(const ParameterVector& mu, const AffineOperatorSet& ops, const SchemeConfig& config);

/// Same scheme with the constraint dropped (European put); lambda is identically zero.
std::vector<Vector> solve_unconstrained(const ParameterVector& mu, const AffineOperatorSet& ops,
                                        const ObstacleData& obstacle, const SchemeConfig& config);

struct TrajectoryCheck {
    double min_gap = 0.0;
    double min_lambda = 0.0;
    double max_complementarity = 0.0;
    double max_linear = 0.0;
    bool ok = true;
};

TrajectoryCheck check_trajectory(const Trajectory& traj, const ObstacleData& obstacle,
                                 const TruthTolerances& tol = {});

/// Writes rows (step, t, s, u, lambda, price) for every step and interior node.
void write_trajectory_csv(const std::string& path, const Trajectory& traj, const Mesh1D& mesh,
                          const ObstacleData& obstacle);

}  // namespace rbam
