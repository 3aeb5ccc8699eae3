#pragma once

#include "locsim/sim/scenario.hpp"

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace locsim {

struct TrialRecord {
    int trial = 0;
    int ue = 0;
    std::string solver;
    double error_m = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    bool failed = false;
    double gdop = 0.0;
    double ref_snr_db = 0.0;
    double peb_m = 0.0;
    long long madds = 0;
    long long inversions = 0;
};

struct SolverSummary {
    std::vector<double> cdf_errors_m; // finite errors, sorted ascending
    double median_error_m = 0.0;      // over all records (failures = +inf)
    double p90_error_m = 0.0;
    double rmse_m = 0.0; // over finite errors
    double mean_iterations = 0.0;
    double failure_rate = 0.0;
    double convergence_rate = 0.0;
    long long n_records = 0;
};

struct RunSummary {
    std::map<std::string, SolverSummary> solvers;
    double peb_rms_m = 0.0;
    double peb_median_m = 0.0;
    double gdop_min = 0.0, gdop_max = 0.0, gdop_median = 0.0;
    double gdop_frac_above_2 = 0.0, gdop_frac_above_5 = 0.0;
    std::string simd_lane;
    int threads = 1;
};

struct RunResult {
    std::vector<TrialRecord> records;
    RunSummary summary;
};

/// Full Monte Carlo evaluation of a scenario. Deterministic for a fixed
/// master_seed regardless of thread count: every random draw comes from a
/// stream derived from (seed, trial, ue, link).
RunResult run_monte_carlo(const Scenario &scn);

/// Per-drop bound report (no measurement synthesis): UE drops with their
/// GDOP/HDOP/rating and TDOA/TOA PEB at nominal SNR (no shadow fading).
struct BoundRow {
    int ue = 0;
    Position position;
    double gdop = 0.0;
    double hdop = 0.0;
    std::string rating;
    double peb_tdoa_m = 0.0;
    double peb_toa_m = 0.0;
};

std::vector<BoundRow> bounds_table(const Scenario &scn, int n_drops);

/// Quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

} // namespace locsim
