#pragma once

#include "locsim/channel.hpp"
#include "locsim/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace locsim {

/// Unit-modulus symbols on an OFDM grid of N subcarriers at spacing scs.
struct PrsGrid {
    std::vector<std::complex<double>> symbols;
    double scs_hz = 15e3;
    int n = 0;

    void validate() const; // throws InvalidInput
};

/// Random QPSK grid; N must be even (subcarrier indices run -N/2 .. N/2-1).
PrsGrid make_qpsk_grid(RngStream &rng, int n, double scs_hz);

/// Effective Fisher information [1/s^2] for the TOA of one link under a
/// multipath CIR, with the channel gains treated as nuisance parameters:
///   I = 2 gamma h^H P^H D Xi D P h,   Xi = I - P (P^H P)^-1 P^H,
/// where P = X F_L has unit-modulus entries (column l carries the phase ramp
/// of tap delay tau_l) and D = diag(2 pi scs n), n = -N/2 .. N/2-1.
double fim_toa_multipath(const ChannelImpulseResponse &cir, const PrsGrid &prs,
                         double snr_linear);

/// AWGN (single-path, known-channel) limit: I = 2 gamma sum (2 pi scs n)^2.
double fim_toa_awgn(double snr_linear, double scs_hz, int n);

/// TOA variance bound in meters^2: c^2 / fim.
double toa_variance_m2(double fim_toa);

/// Measurement-domain FIM of the TDOA vector from per-link TOA variances
/// [m^2] and the (B-1) x B differencing matrix: inv(T diag(var) T^T).
Eigen::MatrixXd fim_tdoa_from_toa(const std::vector<double> &toa_variances_m2,
                                  const Eigen::MatrixXd &transform);

/// Position-domain FIM: H^T F H.
Eigen::MatrixXd fim_position(const Eigen::MatrixXd &jacobian,
                             const Eigen::MatrixXd &meas_fim);

/// Schur complement of the scalar nuisance block of a 3x3 FIM:
/// [[A, b], [b^T, c]] -> A - b b^T / c.
Eigen::Matrix2d efim_schur(const Eigen::Matrix3d &full_fim);

/// Position error bound [m]: sqrt(trace(fim^-1)).
double peb_m(const Eigen::Matrix2d &fim);

/// Differencing matrix mapping B TOAs to B-1 TDOAs against reference_index,
/// rows ordered by anchor index with the reference skipped.
Eigen::MatrixXd tdoa_transform(int n_anchors, int reference_index);

} // namespace locsim
