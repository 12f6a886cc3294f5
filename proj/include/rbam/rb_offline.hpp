#pragma once

#include "rbam/fem_core.hpp"
#include "rbam/vi_truth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rbam {

/// Independent random streams drawn from one seed.
enum class SampleStream : std::uint32_t { Training = 1, Test = 2 };

/// N points, uniform per coordinate in the box, reproducible from (seed, stream).
std::vector<ParameterVector> sample_training_set(const ParameterBox& box, int N, std::uint64_t seed,
                                                 SampleStream stream = SampleStream::Training);

/// Truth trajectories for a set of pairwise distinct parameters on one mesh/scheme.
struct SnapshotStore {
    std::vector<ParameterVector> params;
    std::vector<Trajectory> trajectories;
    std::vector<ObstacleData> obstacles;
    SchemeConfig config;
    int H = 0;
    double s_f = 0.0;

    std::size_t size() const { return params.size(); }
};

SnapshotStore generate_snapshots(const std::vector<ParameterVector>& params, const AffineOperatorSet& ops,
                                 const SchemeConfig& config);

struct Pod1Result {
    Vector mode;           ///< V-normalized dominant mode
    double energy = 0.0;   ///< sum_n <v^n, mode>_V^2, the largest Gram eigenvalue
};

/// Dominant POD mode in the V inner product (method of snapshots).
Pod1Result pod1(const std::vector<Vector>& vectors, const AffineOperatorSet& ops);

/// What a greedy loop does when it runs out of directions before its budget.
enum class SaturationPolicy { Throw, Truncate };

struct GreedyOptions {
    SaturationPolicy on_saturation = SaturationPolicy::Throw;
};

struct PodGreedyResult {
    std::vector<Vector> pod_vectors;     ///< V-orthonormal
    std::vector<double> eps_u;           ///< eps_u[k-1]: max_mu sqrt(sum_n |u^n - P_k u^n|_V^2), k = 1..size
    std::vector<std::size_t> selected;   ///< training index behind each vector
    bool saturated = false;
};

/// POD-greedy for the primal basis using true projection errors.
PodGreedyResult pod_greedy(const SnapshotStore& store, int NV_tilde, const AffineOperatorSet& ops,
                           const GreedyOptions& options = {});

/// Angle (radians) between lambda and span(basis) in the W inner product; pi/2 for an empty basis.
double angle_to_subspace(const DualVector& lambda, const std::vector<DualVector>& basis, const AffineOperatorSet& ops);

struct SnapshotIndex {
    std::size_t mu_index = 0;
    int n = 0;

    friend bool operator==(const SnapshotIndex&, const SnapshotIndex&) = default;
};

struct DualConeBasis {
    std::vector<DualVector> generators;  ///< W-normalized, componentwise >= 0
    std::vector<SnapshotIndex> selected;
};

struct AngleGreedyResult {
    DualConeBasis cone;
    std::vector<double> eps_lambda;  ///< eps_lambda[k-1]: max angle of any candidate to span of k generators
    bool saturated = false;
};

/// Angle-greedy for the dual cone generators over all multiplier snapshots.
AngleGreedyResult angle_greedy(const SnapshotStore& store, int NW, const AffineOperatorSet& ops,
                               const GreedyOptions& options = {});

struct PrimalBasis {
    std::vector<Vector> pod_vectors;
    std::vector<Vector> supremizers;
    Matrix combined;      ///< H x N_V, POD block first
    Matrix reduced_gram;  ///< combined^T X combined
    std::vector<std::string> warnings;

    Eigen::Index NV() const { return combined.cols(); }
};

/// Appends the supremizers B xi_j (not orthonormalized). A supremizer that would push the
/// Gram condition number past kMaxGramCondition is dropped with a warning.
PrimalBasis enrich_with_supremizers(const std::vector<Vector>& pod_vectors, const DualConeBasis& cone,
                                    const AffineOperatorSet& ops);

struct GreedyDiagnostics {
    std::vector<double> eps_u;
    std::vector<double> eps_lambda;
    std::vector<std::size_t> selected_params_u;
    std::vector<ParameterVector> selected_mu_u;
    std::vector<SnapshotIndex> selected_pairs_lambda;
    std::vector<ParameterVector> selected_mu_lambda;
    std::vector<std::string> warnings;
};

/// Everything the online phase needs; no full-order operator is required online.
struct ReducedModel {
    int H = 0;
    double s_f = 0.0;
    SchemeConfig config;
    int NV_tilde = 0;
    int NW = 0;
    int NV = 0;

    Matrix psi_matrix;  ///< H x NV
    Matrix xi_matrix;   ///< H x NW
    Matrix mass_N, A1_N, A2_N, A3_N;
    Vector f1_N, f2_N;
    Matrix B_N;              ///< NV x NW, (B_N)_ij = xi_j . psi_i
    Matrix init_gram;        ///< psi^T X psi
    Matrix init_rhs_factor;  ///< X psi, H x NV

    GreedyDiagnostics diagnostics;
};

/// Throws InfSupFailure unless B_N has full column rank (sigma_min > 1e-10 sigma_max).
void check_inf_sup(const Matrix& B_N);

ReducedModel assemble_reduced(const PrimalBasis& basis, const DualConeBasis& cone, const AffineOperatorSet& ops,
                              const SchemeConfig& config, GreedyDiagnostics diagnostics = {});

struct BasisBudget {
    int NV_tilde = 8;
    int NW = 8;
};

/// Runs both greedy loops, the enrichment and the reduced assembly on one snapshot store.
ReducedModel build_reduced_model(const SnapshotStore& store, const BasisBudget& budget, const AffineOperatorSet& ops,
                                 const GreedyOptions& options = {});

/// Recomputes every reduced quantity from freshly assembled operators and checks the
/// model invariants. Throws ModelCorruption or InfSupFailure on the first violation.
void verify_model(const ReducedModel& model, const AffineOperatorSet& ops);

}  // namespace rbam
