#pragma once

#include "locsim/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace locsim {

/// Per-link measurement model: true geometry plus the noise/bias parameters
/// derived from the link's estimation bounds.
struct LinkModel {
    double true_range_m = 0.0;
    double snr_linear = 1.0;
    double var_awgn_m2 = 0.0;
    double var_multipath_m2 = 0.0;
    double nlos_bias_m = 0.0;
};

struct ToaSet {
    std::vector<double> values_m;
    std::vector<double> variances_m2;
};

/// TDOA values ordered by anchor index with the reference excluded;
/// covariance = diag(sigma_b^2) + sigma_ref^2 * 1 1^T.
struct TdoaSet {
    std::vector<double> values_m;
    int reference_index = 0;
    Eigen::MatrixXd covariance;
};

struct TwToaPair {
    int ue_i = 0;
    int ue_j = 0;
    double range_m = 0.0;
    double variance_m2 = 0.0;
};

struct TwToaSet {
    std::vector<TwToaPair> pairs;
};

/// Inverse-variance weights normalized to sum 1.
struct WeightVector {
    std::vector<double> weights;
};

/// Deterministic NLOS range offset sqrt(var_multipath - var_awgn) [m].
/// A relative deficit beyond -1e-9 throws InconsistentVariances.
double nlos_bias_offset_m(double var_multipath_m2, double var_awgn_m2);

/// true_range + N(0, var_awgn).
double synth_toa_awgn(const LinkModel &link, RngStream &rng);

/// true_range + nlos_bias + N(0, var_multipath).
double synth_toa_multipath(const LinkModel &link, RngStream &rng);

TdoaSet form_tdoa(const ToaSet &toas, int reference_index);

/// Index of the strongest SNR; ties break to the lowest index.
int select_reference(const std::vector<double> &snrs);

WeightVector projection_weights(const std::vector<double> &variances_m2);

struct TwToaLink {
    int ue_i = 0;
    int ue_j = 0;
    double true_range_m = 0.0;
    double variance_m2 = 0.0;
};

/// One Gaussian-noised range per unordered UE pair.
TwToaSet synth_twtoa(const std::vector<TwToaLink> &links, RngStream &rng);

} // namespace locsim
