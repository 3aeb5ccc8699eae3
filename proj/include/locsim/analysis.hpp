#pragma once

#include <Eigen/Dense>

#include <array>
#include <utility>
#include <vector>

namespace locsim {

struct EstimatorStats {
    Eigen::Matrix2d covariance; // position block [m^2]
    double mse = 0.0;           // trace of the position covariance
    std::array<double, 2> eigenvalues{0.0, 0.0};
};

/// Closed-form error covariance / MSE of the two-stage weighted projection
/// estimator, as derived from its linearized final-estimate form:
/// cov = (1/trace(C2^-1)^2) * EFIM(H2^T C2^-1 H2), mse = its trace.
/// h2 is the B x 3 augmented Jacobian, c2_diag the per-anchor variances.
EstimatorStats cov_mse_tswpm(const Eigen::MatrixXd &h2,
                             const Eigen::VectorXd &c2_diag);

/// Closed-form error covariance / MSE of weighted Gauss-Newton:
/// cov = (H1^T C1^-1 H1)^-1, mse = sum of inverse eigenvalues.
EstimatorStats cov_mse_wnls(const Eigen::MatrixXd &h1,
                            const Eigen::MatrixXd &c1);

/// Two-stage MLE error covariance with the reference range estimated first:
/// Sigma = (J^T C1^-1 J - (J^T C1^-1 u)(u^T C1^-1 J)/(u^T C1^-1 u))^-1,
/// where J holds the range Jacobian rows of the non-reference anchors and
/// u is the all-ones vector.
Eigen::Matrix2d mle_cov_two_stage(const Eigen::MatrixXd &j,
                                  const Eigen::MatrixXd &c1,
                                  const Eigen::VectorXd &u);

/// High-GDOP approximations: (1/sum(1/sigma_b^2), 1/lambda_min(H1^T C1^-1 H1)).
std::pair<double, double>
mse_high_gdop_approx(const std::vector<double> &variances_m2,
                     const Eigen::MatrixXd &h1, const Eigen::MatrixXd &c1);

/// Trace normalization factor 1/trace(H1^T W1 H1).
double trace_normalization(const Eigen::MatrixXd &h1,
                           const Eigen::MatrixXd &w1);

} // namespace locsim
