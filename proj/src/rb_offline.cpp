#include "rbam/rb_offline.hpp"

#include "rbam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rbam {

namespace {

// Projection errors below this fraction of the largest snapshot norm are roundoff.
constexpr double kPodSaturationTol = 1e-12;
// Multipliers with a smaller W-norm carry no direction.
constexpr double kZeroMultiplier = 1e-12;
// Angles below this count as already captured by the cone span.
constexpr double kAngleSaturationTol = 1e-10;

double draw(std::mt19937_64& gen, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

}  // namespace

std::vector<ParameterVector> sample_training_set(const ParameterBox& box, int N, std::uint64_t seed,
                                                 SampleStream stream) {
    box.validate();
    if (N < 1) throw std::invalid_argument("sample_training_set: N must be at least 1");
    std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    std::mt19937_64 gen(seq);
    const ParameterVector lo = box.lower();
    const ParameterVector hi = box.upper();

    std::vector<ParameterVector> out;
    out.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        ParameterVector mu;
        mu.K = draw(gen, lo.K, hi.K);
        mu.r = draw(gen, lo.r, hi.r);
        mu.q = draw(gen, lo.q, hi.q);
        mu.sigma = draw(gen, lo.sigma, hi.sigma);
        out.push_back(mu);
    }
    return out;
}

SnapshotStore generate_snapshots(const std::vector<ParameterVector>& params, const AffineOperatorSet& ops,
                                 const SchemeConfig& config) {
    config.validate();
    for (std::size_t i = 0; i < params.size(); ++i) {
        params[i].validate();
        for (std::size_t j = 0; j < i; ++j) {
            if (params[i] == params[j]) {
                throw std::invalid_argument("generate_snapshots: training parameters " + std::to_string(j) + " and " +
                                            std::to_string(i) + " coincide");
            }
        }
    }

    SnapshotStore store;
    store.config = config;
    store.H = ops.mesh().H;
    store.s_f = ops.mesh().s_f;
    store.params = params;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const ParameterVector& mu = params[i];
        store.obstacles.push_back(obstacle_data(ops.mesh(), mu.K));
        const std::string context = " [training parameter " + std::to_string(i) + ": K=" + std::to_string(mu.K) +
                                    " r=" + std::to_string(mu.r) + " q=" + std::to_string(mu.q) +
                                    " sigma=" + std::to_string(mu.sigma) + "]";
        store.trajectories.push_back(
            with_context(context, [&] { return solve_trajectory(mu, ops, store.obstacles.back(), config); }));
    }
    return store;
}

Pod1Result pod1(const std::vector<Vector>& vectors, const AffineOperatorSet& ops) {
    if (vectors.empty()) throw DegenerateInput("pod1: no input vectors");
    const Matrix V = columns_to_matrix(vectors, ops.dim());
    const Matrix XV = ops.X() * V;
    const Matrix gram = V.transpose() * XV;

    const double largest_norm = std::sqrt(std::max(gram.diagonal().maxCoeff(), 0.0));
    if (!(largest_norm > 1e-12)) throw DegenerateInput("pod1: all input vectors vanish");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    if (eig.info() != Eigen::Success) throw NumericalBreakdown("pod1: eigensolver failed");
    const Eigen::Index top = gram.rows() - 1;

    Vector mode = V * eig.eigenvectors().col(top);
    const double norm = v_norm(mode, ops);
    if (!(norm > 0.0)) throw DegenerateInput("pod1: dominant mode vanishes");
    mode /= norm;

    Eigen::Index imax = 0;
    mode.cwiseAbs().maxCoeff(&imax);
    if (mode[imax] < 0.0) mode = -mode;

    return {std::move(mode), eig.eigenvalues()[top]};
}

namespace {

// Modified Gram-Schmidt in V against an orthonormal set, applied twice.
Vector v_orthogonalize(Vector z, const std::vector<Vector>& basis, const AffineOperatorSet& ops) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const Vector& q : basis) z -= v_inner(z, q, ops) * q;
    }
    return z;
}

std::vector<double> trajectory_projection_errors(const SnapshotStore& store, const Matrix& Q, const Matrix& XQ,
                                                 const AffineOperatorSet& ops) {
    std::vector<double> errors(store.size(), 0.0);
    for (std::size_t m = 0; m < store.size(); ++m) {
        double sum = 0.0;
        for (const Vector& u : store.trajectories[m].u) {
            const Vector r = u - Q * (XQ.transpose() * u);
            sum += r.dot(ops.X() * r);
        }
        errors[m] = std::max(sum, 0.0);
    }
    return errors;
}

}  // namespace

PodGreedyResult pod_greedy(const SnapshotStore& store, int NV_tilde, const AffineOperatorSet& ops,
                           const GreedyOptions& options) {
    if (NV_tilde < 1) throw std::invalid_argument("pod_greedy: NV_tilde must be at least 1");
    if (store.size() == 0) throw std::invalid_argument("pod_greedy: empty snapshot store");

    double scale = 0.0;
    for (const Trajectory& t : store.trajectories) {
        for (const Vector& u : t.u) scale = std::max(scale, v_norm(u, ops));
    }

    PodGreedyResult result;
    const Vector& first = store.trajectories.front().u.front();
    const double first_norm = v_norm(first, ops);
    if (!(first_norm > 1e-12)) throw DegenerateInput("pod_greedy: initial snapshot u^0 vanishes");
    result.pod_vectors.push_back(first / first_norm);
    result.selected.push_back(0);

    auto saturate = [&](const std::string& why) {
        if (options.on_saturation == SaturationPolicy::Throw) {
            throw BasisSaturation("pod_greedy: " + why + " after " + std::to_string(result.pod_vectors.size()) +
                                      " basis vectors",
                                  result.pod_vectors.size());
        }
        result.saturated = true;
    };

    while (true) {
        const Matrix Q = columns_to_matrix(result.pod_vectors, ops.dim());
        const Matrix XQ = ops.X() * Q;
        const std::vector<double> errors = trajectory_projection_errors(store, Q, XQ, ops);
        const auto best = static_cast<std::size_t>(std::max_element(errors.begin(), errors.end()) - errors.begin());
        const double eps = std::sqrt(errors[best]);
        result.eps_u.push_back(eps);

        if (static_cast<int>(result.pod_vectors.size()) >= NV_tilde) break;
        if (!(eps > kPodSaturationTol * scale)) {
            saturate("snapshots exhausted");
            break;
        }

        const Trajectory& traj = store.trajectories[best];
        std::vector<Vector> residuals;
        residuals.reserve(traj.u.size());
        for (const Vector& u : traj.u) residuals.push_back(u - Q * (XQ.transpose() * u));

        Vector z = v_orthogonalize(pod1(residuals, ops).mode, result.pod_vectors, ops);
        const double norm = v_norm(z, ops);
        if (!(norm >= 1e-12)) {
            saturate("new mode lies in the current span");
            break;
        }
        result.pod_vectors.push_back(z / norm);
        result.selected.push_back(best);
    }
    return result;
}

namespace {

/// span(Xi) in W, kept as a W-orthonormal basis with cached Riesz representatives.
class WSubspace {
public:

    void add(const Vector& xi, const Vector& riesz_xi) {
        Vector v = xi;
        Vector rv = riesz_xi;
        const double norm0 = std::sqrt(std::max(v.dot(rv), 0.0));
        orthogonalize(v, rv);
        const double norm = std::sqrt(std::max(v.dot(rv), 0.0));
        if (!(norm > 1e-13 * norm0)) return;
        basis_.push_back(v / norm);
        riesz_.push_back(rv / norm);
    }

    // atan2 of the residual and projection W-norms equals arccos(|P lambda|_W / |lambda|_W)
    // and stays accurate for small angles.
    double angle(const Vector& lambda, const Vector& riesz_lambda) const {
        Vector r = lambda;
        Vector rr = riesz_lambda;
        orthogonalize(r, rr);
        const double res = std::sqrt(std::max(r.dot(rr), 0.0));
        const double proj = std::sqrt(std::max((lambda - r).dot(riesz_lambda - rr), 0.0));
        return std::atan2(res, proj);
    }

private:
    void orthogonalize(Vector& v, Vector& rv) const {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < basis_.size(); ++j) {
                const double c = riesz_[j].dot(v);
                v -= c * basis_[j];
                rv -= c * riesz_[j];
            }
        }
    }

    std::vector<Vector> basis_;
    std::vector<Vector> riesz_;
};

}  // namespace

double angle_to_subspace(const DualVector& lambda, const std::vector<DualVector>& basis, const AffineOperatorSet& ops) {
    if (lambda.coeffs.size() != ops.dim()) throw std::invalid_argument("angle_to_subspace: dimension mismatch");
    const Vector riesz_lambda = ops.solve_gram(lambda.coeffs);
    const double norm = std::sqrt(std::max(lambda.coeffs.dot(riesz_lambda), 0.0));
    if (!(norm > kZeroMultiplier)) throw DegenerateInput("angle_to_subspace: zero vector has no angle");

    WSubspace span;
    for (const DualVector& xi : basis) {
        if (xi.coeffs.size() != ops.dim()) throw std::invalid_argument("angle_to_subspace: dimension mismatch");
        span.add(xi.coeffs, ops.solve_gram(xi.coeffs));
    }
    return span.angle(lambda.coeffs, riesz_lambda);
}

AngleGreedyResult angle_greedy(const SnapshotStore& store, int NW, const AffineOperatorSet& ops,
                               const GreedyOptions& options) {
    if (NW < 1) throw std::invalid_argument("angle_greedy: NW must be at least 1");

    struct Candidate {
        SnapshotIndex index;
        const Vector* lambda;
        Vector riesz;
        double norm;
    };
    std::vector<Candidate> candidates;
    for (std::size_t m = 0; m < store.size(); ++m) {
        const Trajectory& traj = store.trajectories[m];
        for (int n = 1; n <= static_cast<int>(traj.lambda.size()); ++n) {
            const Vector& lambda = traj.multiplier(n);
            Vector riesz = ops.solve_gram(lambda);
            const double norm = std::sqrt(std::max(lambda.dot(riesz), 0.0));
            if (norm > kZeroMultiplier) candidates.push_back({{m, n}, &lambda, std::move(riesz), norm});
        }
    }
    if (candidates.empty()) throw DegenerateInput("angle_greedy: every multiplier snapshot vanishes");

    AngleGreedyResult result;
    WSubspace span;
    auto append = [&](const Candidate& c) {
        result.cone.generators.push_back(DualVector{*c.lambda / c.norm});
        result.cone.selected.push_back(c.index);
        span.add(result.cone.generators.back().coeffs, c.riesz / c.norm);
    };
    append(candidates.front());

    while (true) {
        std::size_t best = 0;
        double best_angle = -1.0;
        for (std::size_t k = 0; k < candidates.size(); ++k) {
            const double a = span.angle(*candidates[k].lambda, candidates[k].riesz);
            if (a > best_angle) {
                best_angle = a;
                best = k;
            }
        }
        result.eps_lambda.push_back(best_angle);

        if (static_cast<int>(result.cone.generators.size()) >= NW) break;
        if (!(best_angle > kAngleSaturationTol)) {
            if (options.on_saturation == SaturationPolicy::Throw) {
                throw ConeSaturation("angle_greedy: no snapshot outside the current span after " +
                                         std::to_string(result.cone.generators.size()) + " generators",
                                     result.cone.generators.size());
            }
            result.saturated = true;
            break;
        }
        append(candidates[best]);
    }
    return result;
}

PrimalBasis enrich_with_supremizers(const std::vector<Vector>& pod_vectors, const DualConeBasis& cone,
                                    const AffineOperatorSet& ops) {
    PrimalBasis basis;
    basis.pod_vectors = pod_vectors;
    basis.combined = columns_to_matrix(pod_vectors, ops.dim());
    basis.reduced_gram = basis.combined.transpose() * (ops.X() * basis.combined);

    for (std::size_t j = 0; j < cone.generators.size(); ++j) {
        const Vector sup = riesz_supremizer(cone.generators[j], ops);
        Matrix trial(ops.dim(), basis.combined.cols() + 1);
        trial << basis.combined, sup;
        Matrix gram = trial.transpose() * (ops.X() * trial);
        const double cond = spd_condition_number(gram);
        if (!(cond < kMaxGramCondition)) {
            basis.warnings.push_back("supremizer " + std::to_string(j) +
                                     " dropped: reduced Gram condition number " + std::to_string(cond));
            continue;
        }
        basis.supremizers.push_back(sup);
        basis.combined = std::move(trial);
        basis.reduced_gram = std::move(gram);
    }
    return basis;
}

void check_inf_sup(const Matrix& B_N) {
    if (B_N.cols() == 0) return;
    if (B_N.rows() < B_N.cols()) throw InfSupFailure("B_N has fewer rows than columns");
    Eigen::JacobiSVD<Matrix> svd(B_N);
    const Vector& s = svd.singularValues();
    const double hi = s.maxCoeff();
    const double lo = s.minCoeff();
    if (!(hi > 0.0) || !(lo > 1e-10 * hi)) {
        throw InfSupFailure("B_N lost full column rank: sigma_min / sigma_max = " + std::to_string(lo / hi));
    }
}

namespace {

struct ReducedOperators {
    Matrix mass, A1, A2, A3, init_gram, init_rhs_factor, B;
    Vector f1, f2;
};

ReducedOperators reduce(const Matrix& psi, const Matrix& xi, const AffineOperatorSet& ops) {
    ReducedOperators r;
    r.mass = psi.transpose() * (ops.mass() * psi);
    r.A1 = psi.transpose() * (ops.A1() * psi);
    r.A2 = psi.transpose() * (ops.A2() * psi);
    r.A3 = psi.transpose() * (ops.A3() * psi);
    r.f1 = psi.transpose() * ops.f1();
    r.f2 = psi.transpose() * ops.f2();
    r.init_rhs_factor = ops.X() * psi;
    r.init_gram = psi.transpose() * r.init_rhs_factor;
    r.B = psi.transpose() * xi;
    return r;
}

}  // namespace

ReducedModel assemble_reduced(const PrimalBasis& basis, const DualConeBasis& cone, const AffineOperatorSet& ops,
                              const SchemeConfig& config, GreedyDiagnostics diagnostics) {
    config.validate();
    if (basis.combined.rows() != ops.dim()) throw std::invalid_argument("assemble_reduced: basis/mesh mismatch");

    ReducedModel model;
    model.H = ops.mesh().H;
    model.s_f = ops.mesh().s_f;
    model.config = config;
    model.NV_tilde = static_cast<int>(basis.pod_vectors.size());
    model.NW = static_cast<int>(cone.generators.size());
    model.NV = static_cast<int>(basis.combined.cols());
    model.psi_matrix = basis.combined;
    model.xi_matrix.resize(ops.dim(), model.NW);
    for (int j = 0; j < model.NW; ++j) {
        const Vector& c = cone.generators[static_cast<std::size_t>(j)].coeffs;
        if (c.size() != ops.dim()) throw std::invalid_argument("assemble_reduced: cone/mesh mismatch");
        model.xi_matrix.col(j) = c;
    }

    ReducedOperators r = reduce(model.psi_matrix, model.xi_matrix, ops);
    model.mass_N = std::move(r.mass);
    model.A1_N = std::move(r.A1);
    model.A2_N = std::move(r.A2);
    model.A3_N = std::move(r.A3);
    model.f1_N = std::move(r.f1);
    model.f2_N = std::move(r.f2);
    model.B_N = std::move(r.B);
    model.init_gram = std::move(r.init_gram);
    model.init_rhs_factor = std::move(r.init_rhs_factor);

    check_inf_sup(model.B_N);

    diagnostics.warnings.insert(diagnostics.warnings.end(), basis.warnings.begin(), basis.warnings.end());
    model.diagnostics = std::move(diagnostics);
    return model;
}

ReducedModel build_reduced_model(const SnapshotStore& store, const BasisBudget& budget, const AffineOperatorSet& ops,
                                 const GreedyOptions& options) {
    const PodGreedyResult pod = pod_greedy(store, budget.NV_tilde, ops, options);

    GreedyDiagnostics diag;
    diag.eps_u = pod.eps_u;
    diag.selected_params_u = pod.selected;
    for (std::size_t m : pod.selected) diag.selected_mu_u.push_back(store.params[m]);
    if (pod.saturated) {
        diag.warnings.push_back("POD-greedy saturated at " + std::to_string(pod.pod_vectors.size()) + " of " +
                                std::to_string(budget.NV_tilde) + " vectors");
    }

    DualConeBasis cone;
    if (budget.NW > 0) {
        AngleGreedyResult ang = angle_greedy(store, budget.NW, ops, options);
        diag.eps_lambda = ang.eps_lambda;
        diag.selected_pairs_lambda = ang.cone.selected;
        for (const SnapshotIndex& s : ang.cone.selected) diag.selected_mu_lambda.push_back(store.params[s.mu_index]);
        if (ang.saturated) {
            diag.warnings.push_back("angle-greedy saturated at " + std::to_string(ang.cone.generators.size()) +
                                    " of " + std::to_string(budget.NW) + " generators");
        }
        cone = std::move(ang.cone);
    }

    const PrimalBasis basis = enrich_with_supremizers(pod.pod_vectors, cone, ops);
    return assemble_reduced(basis, cone, ops, store.config, std::move(diag));
}

namespace {

void expect_close(const Matrix& stored, const Matrix& fresh, const char* name, double tol = 1e-12) {
    if (stored.rows() != fresh.rows() || stored.cols() != fresh.cols()) {
        throw ModelCorruption(std::string("model field ") + name + " has wrong dimensions");
    }
    if (stored.size() == 0) return;
    const double scale = std::max(fresh.norm(), 1e-300);
    const double diff = (stored - fresh).norm();
    if (!std::isfinite(diff) || diff > tol * scale) {
        throw ModelCorruption(std::string("model field ") + name + " does not match its recomputation (rel diff " +
                              std::to_string(diff / scale) + ")");
    }
}

}  // namespace

void verify_model(const ReducedModel& model, const AffineOperatorSet& ops) {
    if (model.H != ops.mesh().H || model.s_f != ops.mesh().s_f) {
        throw ModelCorruption("model mesh does not match the operators");
    }
    if (model.psi_matrix.rows() != model.H || model.psi_matrix.cols() != model.NV ||
        model.xi_matrix.rows() != model.H || model.xi_matrix.cols() != model.NW) {
        throw ModelCorruption("model basis dimensions are inconsistent");
    }
    if (model.NV_tilde < 0 || model.NV < model.NV_tilde || model.NV > model.NV_tilde + model.NW) {
        throw ModelCorruption("model basis sizes are inconsistent");
    }

    const ReducedOperators r = reduce(model.psi_matrix, model.xi_matrix, ops);
    expect_close(model.mass_N, r.mass, "Mass_N");
    expect_close(model.A1_N, r.A1, "A1_N");
    expect_close(model.A2_N, r.A2, "A2_N");
    expect_close(model.A3_N, r.A3, "A3_N");
    expect_close(model.f1_N, r.f1, "f1_N");
    expect_close(model.f2_N, r.f2, "f2_N");
    expect_close(model.B_N, r.B, "B_N");
    expect_close(model.init_gram, r.init_gram, "init_gram");
    expect_close(model.init_rhs_factor, r.init_rhs_factor, "init_rhs_factor");

    const Matrix pod = model.psi_matrix.leftCols(model.NV_tilde);
    const Matrix pod_gram = pod.transpose() * (ops.X() * pod);
    if ((pod_gram - Matrix::Identity(model.NV_tilde, model.NV_tilde)).cwiseAbs().maxCoeff() > 1e-10) {
        throw ModelCorruption("POD block is not V-orthonormal");
    }
    if (!(spd_condition_number(model.init_gram) < kMaxGramCondition)) {
        throw ModelCorruption("primal reduced basis is linearly dependent");
    }
    for (int j = 0; j < model.NW; ++j) {
        const DualVector xi{model.xi_matrix.col(j)};
        if (std::abs(w_norm(xi, ops) - 1.0) > 1e-10) {
            throw ModelCorruption("cone generator " + std::to_string(j) + " is not W-normalized");
        }
        if (!xi.in_cone(1e-14)) throw ModelCorruption("cone generator " + std::to_string(j) + " leaves the cone");
    }
    check_inf_sup(model.B_N);
}

}  // namespace rbam
