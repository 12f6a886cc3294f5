#include "rbam/vi_truth.hpp"

#include "rbam/csv_io.hpp"
#include "rbam/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rbam {

void SchemeConfig::validate() const {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("scheme: T must be positive");
    if (L < 1) throw std::invalid_argument("scheme: L must be at least 1");
    if (!(theta >= 0.0 && theta <= 1.0)) throw std::invalid_argument("scheme: theta must lie in [0, 1]");
}

namespace {

void check_dims(const Vector& u_prev, const AffineOperatorSet& ops, const ObstacleData& obstacle) {
    if (u_prev.size() != ops.dim() || obstacle.psi_tilde.size() != ops.dim()) {
        throw std::invalid_argument("theta_step: inputs belong to different meshes");
    }
}

}  // namespace

StepResult theta_step(const Vector& u_prev, const ParameterVector& mu, const AffineOperatorSet& ops,
                      const ObstacleData& obstacle, const SchemeConfig& config, const LcpOptions& lcp) {
    config.validate();
    check_dims(u_prev, ops, obstacle);

    const double inv_dt = 1.0 / config.delta_t();
    const SparseMatrix A = ops.a(mu);
    SparseMatrix S = inv_dt * ops.mass() + config.theta * A;
    S.makeCompressed();
    const SparseMatrix R = inv_dt * ops.mass() - (1.0 - config.theta) * A;
    const Vector rhs = R * u_prev + ops.f(mu);

    const LcpProblem problem(std::move(S), rhs, obstacle.psi_tilde);
    StepResult out;
    out.lcp = solve_lcp(problem, lcp);
    out.u = out.lcp.u;
    out.lambda = out.lcp.lambda;
    out.residuals = lcp_residuals(problem, out.u, out.lambda);
    return out;
}

Trajectory solve_trajectory(const ParameterVector& mu, const AffineOperatorSet& ops, const ObstacleData& obstacle,
                            const SchemeConfig& config) {
    mu.validate();
    config.validate();

    Trajectory traj;
    traj.mu = mu;
    traj.config = config;
    traj.u.reserve(static_cast<std::size_t>(config.L) + 1);
    traj.u.push_back(obstacle.psi_tilde);

    LcpOptions options;
    for (int n = 1; n <= config.L; ++n) {
        StepResult step = with_context(" (time step " + std::to_string(n) + ")", [&] {
            return theta_step(traj.u.back(), mu, ops, obstacle, config, options);
        });
        // The previous active set is a good first guess for the next step.
        options.initial_active = step.lcp.active;
        traj.u.push_back(std::move(step.u));
        traj.lambda.push_back(std::move(step.lambda));
        traj.iterations.push_back(step.lcp.iterations);
        traj.residuals.push_back(step.residuals);
    }
    return traj;
}

Trajectory solve_trajectory(const ParameterVector& mu, const AffineOperatorSet& ops, const SchemeConfig& config) {
    mu.validate();
    return solve_trajectory(mu, ops, obstacle_data(ops.mesh(), mu.K), config);
}

std::vector<Vector> solve_unconstrained(const ParameterVector& mu, const AffineOperatorSet& ops,
                                        const ObstacleData& obstacle, const SchemeConfig& config) {
    config.validate();
    const double inv_dt = 1.0 / config.delta_t();
    const SparseMatrix A = ops.a(mu);
    SparseMatrix S = inv_dt * ops.mass() + config.theta * A;
    S.makeCompressed();
    const SparseMatrix R = inv_dt * ops.mass() - (1.0 - config.theta) * A;
    const Vector f = ops.f(mu);

    Eigen::SparseLU<SparseMatrix> lu(S);
    if (lu.info() != Eigen::Success) throw NumericalBreakdown("solve_unconstrained: singular step matrix");

    std::vector<Vector> u{obstacle.psi_tilde};
    for (int n = 1; n <= config.L; ++n) u.push_back(lu.solve(R * u.back() + f));
    return u;
}

TrajectoryCheck check_trajectory(const Trajectory& traj, const ObstacleData& obstacle, const TruthTolerances& tol) {
    TrajectoryCheck check;
    check.min_gap = std::numeric_limits<double>::infinity();
    check.min_lambda = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.lambda.size(); ++k) {
        const Vector& u = traj.u[k + 1];
        const Vector& lambda = traj.lambda[k];
        const Vector gap = u - obstacle.psi_tilde;
        check.min_gap = std::min(check.min_gap, gap.minCoeff());
        check.min_lambda = std::min(check.min_lambda, lambda.minCoeff());
        const double comp = std::abs(lambda.dot(gap)) /
                            (1.0 + u.lpNorm<Eigen::Infinity>() * lambda.lpNorm<Eigen::Infinity>());
        check.max_complementarity = std::max(check.max_complementarity, comp);
        if (k < traj.residuals.size()) check.max_linear = std::max(check.max_linear, traj.residuals[k].linear);
    }
    check.ok = check.min_gap >= -tol.gap && check.min_lambda >= -tol.lambda &&
               check.max_complementarity <= tol.complementarity && check.max_linear <= tol.linear;
    return check;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, const Mesh1D& mesh,
                          const ObstacleData& obstacle) {
    CsvWriter csv(path, {"step", "t", "s", "u", "lambda", "price"});
    for (std::size_t n = 0; n < traj.u.size(); ++n) {
        const auto step = static_cast<int>(n);
        for (int i = 0; i < mesh.H; ++i) {
            const double u = traj.u[n][i];
            // lambda^0 is not defined by the scheme; left empty.
            csv.write({std::to_string(step), format_real(traj.config.time(step)), format_real(mesh.dof_coordinate(i)),
                       format_real(u), n == 0 ? std::string() : format_real(traj.lambda[n - 1][i]),
                       format_real(u + obstacle.p0[i])});
        }
    }
}

}  // namespace rbam
