#include "rbam/rb_online.hpp"

#include "rbam/csv_io.hpp"
#include "rbam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rbam {

OnlineData online_setup(const ReducedModel& model, const ParameterVector& mu, const SchemeConfig& config) {
    mu.validate();
    config.validate();
    if (model.NV < 1) throw ModelCorruption("online_setup: empty primal basis");

    OnlineData d;
    d.mu = mu;
    d.config = config;
    d.A_N = (mu.sigma * mu.sigma) * model.A1_N + (mu.r - mu.q) * model.A2_N + mu.r * model.A3_N;
    d.f_N = (mu.K * mu.q) * model.f1_N - (mu.K * mu.r) * model.f2_N;
    const double inv_dt = 1.0 / config.delta_t();
    d.S_N = inv_dt * model.mass_N + config.theta * d.A_N;
    d.R_N = inv_dt * model.mass_N - (1.0 - config.theta) * d.A_N;

    const Mesh1D mesh = build_mesh(model.H, model.s_f);
    const ObstacleData obstacle = obstacle_data(mesh, mu.K);
    d.g_N = model.xi_matrix.transpose() * obstacle.psi_tilde;

    const Vector init_rhs = model.init_rhs_factor.transpose() * obstacle.psi_tilde;
    Eigen::LDLT<Matrix> gram(model.init_gram);
    if (gram.info() != Eigen::Success || !gram.isPositive()) {
        throw ModelCorruption("online_setup: reduced V-Gram matrix is not positive definite");
    }
    d.u0_N = gram.solve(init_rhs);
    const double res = (model.init_gram * d.u0_N - init_rhs).norm();
    if (!(res <= 1e-10 * std::max(init_rhs.norm(), 1e-300))) {
        throw ModelCorruption("online_setup: initial projection residual " + std::to_string(res));
    }

    d.S_lu.compute(d.S_N);
    if (!(d.S_lu.rcond() > 1e-15)) throw ModelCorruption("online_setup: reduced step matrix is singular");
    d.Z = d.S_lu.solve(model.B_N);
    d.schur = model.B_N.transpose() * d.Z;
    return d;
}

OnlineData online_setup(const ReducedModel& model, const ParameterVector& mu) {
    return online_setup(model, mu, model.config);
}

ReducedStep reduced_step(const Vector& uN_prev, const OnlineData& data, const ReducedModel& model,
                         const LcpOptions& lcp) {
    if (uN_prev.size() != model.NV) throw std::invalid_argument("reduced_step: dimension mismatch");
    const Vector rhs = data.R_N * uN_prev + data.f_N;
    const Vector y = data.S_lu.solve(rhs);

    ReducedStep step;
    if (model.NW == 0) {
        step.uN = y;
        step.alpha = Vector(0);
        return step;
    }
    // Obstacle form: schur alpha - w = -(B^T y - g), alpha >= 0, w >= 0.
    const Vector q = model.B_N.transpose() * y - data.g_N;
    const DenseLcpProblem problem(data.schur, -q, Vector::Zero(model.NW));
    step.lcp = solve_lcp(problem, lcp);
    step.alpha = step.lcp.u;
    step.uN = y + data.Z * step.alpha;
    return step;
}

ReducedTrajectory reduced_trajectory(const ReducedModel& model, const ParameterVector& mu, const SchemeConfig& config) {
    const OnlineData data = online_setup(model, mu, config);
    ReducedTrajectory rt;
    rt.mu = mu;
    rt.config = config;
    rt.uN.push_back(data.u0_N);

    LcpOptions options;
    for (int n = 1; n <= config.L; ++n) {
        ReducedStep step = with_context(" (reduced time step " + std::to_string(n) + ")",
                                        [&] { return reduced_step(rt.uN.back(), data, model, options); });
        if (model.NW > 0) options.initial_active = step.lcp.active;
        rt.uN.push_back(std::move(step.uN));
        rt.alpha.push_back(std::move(step.alpha));
        rt.iterations.push_back(step.lcp.iterations);
    }
    return rt;
}

ReducedTrajectory reduced_trajectory(const ReducedModel& model, const ParameterVector& mu) {
    return reduced_trajectory(model, mu, model.config);
}

ReducedCheck check_reduced_trajectory(const ReducedTrajectory& rt, const ReducedModel& model, const OnlineData& data) {
    ReducedCheck check;
    if (model.NW == 0) return check;
    check.min_alpha = std::numeric_limits<double>::infinity();
    check.min_slack = std::numeric_limits<double>::infinity();
    const double g_scale = 1.0 + data.g_N.lpNorm<Eigen::Infinity>();
    for (std::size_t k = 0; k < rt.alpha.size(); ++k) {
        const Vector& alpha = rt.alpha[k];
        const Vector w = model.B_N.transpose() * rt.uN[k + 1] - data.g_N;
        check.min_alpha = std::min(check.min_alpha, alpha.minCoeff());
        check.min_slack = std::min(check.min_slack, w.minCoeff() / g_scale);
        const double comp =
            std::abs(alpha.dot(w)) / (1.0 + alpha.lpNorm<Eigen::Infinity>() * w.lpNorm<Eigen::Infinity>());
        check.max_complementarity = std::max(check.max_complementarity, comp);
    }
    check.ok = check.min_alpha >= -1e-12 && check.min_slack >= -1e-9 && check.max_complementarity <= 1e-9;
    return check;
}

NodalTrajectory reconstruct(const ReducedModel& model, const ReducedTrajectory& rt, double K, const Mesh1D& mesh) {
    if (mesh.H != model.H || model.psi_matrix.rows() != mesh.H) throw std::invalid_argument("reconstruct: mesh mismatch");
    const ObstacleData obstacle = obstacle_data(mesh, K);
    NodalTrajectory out;
    for (const Vector& c : rt.uN) {
        if (c.size() != model.NV) throw std::invalid_argument("reconstruct: coefficient dimension mismatch");
        out.u.push_back(model.psi_matrix * c);
        out.price.push_back(out.u.back() + obstacle.p0);
    }
    for (const Vector& a : rt.alpha) {
        if (a.size() != model.NW) throw std::invalid_argument("reconstruct: cone dimension mismatch");
        out.lambda.push_back(model.xi_matrix * a);
    }
    return out;
}

double error_norm(const std::vector<Vector>& truth_u, const std::vector<Vector>& reduced_u,
                  const AffineOperatorSet& ops, const SchemeConfig& config) {
    if (truth_u.size() != reduced_u.size() || truth_u.size() != static_cast<std::size_t>(config.L) + 1) {
        throw std::invalid_argument("error_norm: number of time steps differs");
    }
    double sum = 0.0;
    for (std::size_t n = 0; n < truth_u.size(); ++n) {
        if (truth_u[n].size() != ops.dim() || reduced_u[n].size() != ops.dim()) {
            throw std::invalid_argument("error_norm: spatial dimension differs");
        }
        const Vector e = truth_u[n] - reduced_u[n];
        sum += e.dot(ops.X() * e);
    }
    return std::sqrt(config.delta_t() * std::max(sum, 0.0));
}

double error_norm(const Trajectory& truth, const NodalTrajectory& reduced, const AffineOperatorSet& ops) {
    return error_norm(truth.u, reduced.u, ops, truth.config);
}

ErrorReport err_linf(const ReducedModel& model, const std::vector<ParameterVector>& test_set,
                     const AffineOperatorSet& ops, const ParameterBox* box) {
    if (ops.mesh().H != model.H) throw std::invalid_argument("err_linf: model and operators use different meshes");
    ErrorReport report;
    report.NV_tilde = model.NV_tilde;
    report.NW = model.NW;
    report.NV = model.NV;
    for (const ParameterVector& mu : test_set) {
        const Trajectory truth = solve_trajectory(mu, ops, model.config);
        const ReducedTrajectory rt = reduced_trajectory(model, mu, model.config);
        const NodalTrajectory nodal = reconstruct(model, rt, mu.K, ops.mesh());
        report.test_params.push_back(mu);
        report.err.push_back(error_norm(truth, nodal, ops));
        report.out_of_box.push_back(box != nullptr && !box->contains(mu));
    }
    report.err_linf = report.err.empty() ? 0.0 : *std::max_element(report.err.begin(), report.err.end());
    return report;
}

void write_error_report_csv(const std::string& path, const ErrorReport& report) {
    CsvWriter csv(path, {"K", "r", "q", "sigma", "err_N"});
    for (std::size_t i = 0; i < report.err.size(); ++i) {
        const ParameterVector& mu = report.test_params[i];
        csv.write({format_real(mu.K), format_real(mu.r), format_real(mu.q), format_real(mu.sigma),
                   format_real(report.err[i])});
    }
    csv.write({"ERR_LINF", "", "", "", format_real(report.err_linf)});
}

}  // namespace rbam
