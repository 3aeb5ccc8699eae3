#pragma once

#include "locsim/geometry.hpp"
#include "locsim/measurements.hpp"

#include <string>
#include <vector>

namespace locsim {

/// Scaling of the cooperative position update. as_printed keeps the extra
/// 1/B and 1/|S_n| prefactors of the published pseudocode (which
/// double-normalize on top of the unit-sum weights); alg1_consistent uses a
/// single inverse-variance weighting across anchors and neighbors so the
/// cooperation-free case reduces exactly to the non-cooperative solver.
enum class CoopAnchorScaling { as_printed, alg1_consistent };

struct SolverConfig {
    double epsilon = 1e-7; // residual-change threshold [m^2]
    int consecutive_hits = 10;
    int max_iterations = 100;
    double regularization = 0.0; // lambda for wnls/nls normal matrix
    CoopAnchorScaling coop_anchor_scaling = CoopAnchorScaling::as_printed;

    void validate() const;
};

/// Arithmetic accounting: scalar_madds counts multiplies/divides/sqrts in
/// the iteration loop; matrix_inversions counts dense matrix inverses.
struct OpCounter {
    long long scalar_madds = 0;
    long long matrix_inversions = 0;
};

struct SolverResult {
    Position estimate;
    int iterations = 0;
    std::vector<double> residual_trace; // R^k, k = 1..iterations
    bool converged = false;
    double range_estimate_m = 0.0; // reference-range state (ts_wpm only)
    OpCounter ops;
    bool failed = false; // cooperative per-UE failure flag
    std::string failure;
};

/// Two-stage weighted projection for TDOA: alternates inverse-variance
/// weighted projection position updates with refinement of the reference
/// range estimate. Requires B >= 3.
SolverResult ts_wpm(const TdoaSet &tdoa, const AnchorSet &anchors,
                    const WeightVector &weights, const SolverConfig &cfg,
                    Position init, double init_range_m);

/// Gauss-Newton on the conventional TDOA residual with W = C1^-1
/// (Sherman-Morrison inverse of the diag + rank-one TDOA covariance).
SolverResult wnls(const TdoaSet &tdoa, const AnchorSet &anchors,
                  const SolverConfig &cfg, Position init);

/// wnls with identity weighting.
SolverResult nls(const TdoaSet &tdoa, const AnchorSet &anchors,
                 const SolverConfig &cfg, Position init);

/// Single-stage parallel projection: uniform weights, reference range taken
/// from the current iterate geometry, no range-refinement state.
SolverResult ippm(const TdoaSet &tdoa, const AnchorSet &anchors,
                  const SolverConfig &cfg, Position init);

struct CoopNeighbor {
    int ue = 0;            // index into CoopScenario::ues
    double range_m = 0.0;  // TW-TOA measurement
    double variance_m2 = 0.0;
};

struct CoopUe {
    TdoaSet tdoa;
    AnchorSet anchors;
    std::vector<double> anchor_variances_m2; // per-anchor, for the weights
    std::vector<CoopNeighbor> neighbors;     // S_n (excludes this UE)
};

struct CoopScenario {
    std::vector<CoopUe> ues;
};

/// Cooperative two-stage weighted projection (Jacobi-style: every UE reads
/// neighbor estimates from the previous sweep, so results are independent
/// of UE processing order). Requires >= 2 anchors and
/// anchors + |S_n| >= 3 per UE.
std::vector<SolverResult> ts_wpm_coop(const CoopScenario &scn,
                                      const SolverConfig &cfg,
                                      const std::vector<Position> &init,
                                      const std::vector<double> &init_range_m);

/// Cooperative Gauss-Newton on stacked TDOA + TW-TOA residuals with block
/// weights (C1^-1, diag(1/var_u)); Jacobi outer loop. Per-UE ill
/// conditioning is reported through SolverResult::failed.
std::vector<SolverResult> wnls_coop(const CoopScenario &scn,
                                    const SolverConfig &cfg,
                                    const std::vector<Position> &init);

/// Nearest-anchor initialization nudged 1e-6 m toward the anchor centroid
/// so the projection update never divides by a zero range.
Position nearest_anchor_init(const AnchorSet &anchors, Position ue_hint);

} // namespace locsim
