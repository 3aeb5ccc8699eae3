#pragma once

#include "locsim/rng.hpp"

#include <complex>
#include <vector>

namespace locsim {

/// Radio configuration of one deployment; powers in dBm, everything else SI.
struct LinkBudget {
    double tx_power_dbm = 23.0;
    double carrier_hz = 3.5e9;
    double bandwidth_hz = 5e6;
    double noise_figure_db = 9.0;
    double shadow_std_db = 8.0;
    double scs_hz = 15e3;
    int n_subcarriers = 300;

    void validate() const; // throws InvalidInput
};

/// Propagation geometry of one anchor-UE link for the dual-stripe model.
struct LinkGeometry {
    double distance_3d_m = 0.0;
    double indoor_distance_2d_m = 0.0;
    int n_floors = 0;
    int n_internal_walls = 0;
    int n_external_walls = 0;
};

/// Cluster taps: delays relative to the first (direct) tap, complex gains
/// with unit total power.
struct ChannelImpulseResponse {
    std::vector<double> tap_delays_s;
    std::vector<std::complex<double>> tap_gains;

    int length() const { return static_cast<int>(tap_delays_s.size()); }
    double total_power() const;
};

/// Dual-stripe NLOS path loss [dB]:
/// max(15.3 + 37.6 log10 R, 38.46 + 20 log10 R) + 0.7 d_indoor
///   + 18.3 n^((n+2)/(n+1) - 0.46) + 5 per internal wall + 20 per external.
double path_loss_db(const LinkGeometry &geom);

/// Thermal noise floor [dBm] at 290 K: -174 + 10 log10(bandwidth).
double thermal_noise_dbm(double bandwidth_hz);

/// SNR [dB] = P_t - PL - SF - N0 - NF.
double snr_db(const LinkBudget &budget, double path_loss_db_v,
              double shadow_db);

/// One zero-mean lognormal shadow-fading draw [dB].
double sample_shadow_db(RngStream &rng, double shadow_std_db);

struct CdlTap {
    double normalized_delay;
    double power_db;
};

/// CDL-A power-delay profile (TR 38.901 Table 7.7.1-1). The same table is
/// shipped as data/cdl_a_tr38901.csv; a unit test keeps the two in sync.
const std::vector<CdlTap> &cdl_a_profile();

/// Rayleigh-faded CDL-A draw: strongest max_taps clusters, delays scaled by
/// delay_spread and re-referenced so the first kept tap sits at 0, gains
/// circularly-symmetric Gaussian with the table powers, renormalized to
/// unit total power.
ChannelImpulseResponse sample_cdl_a(RngStream &rng, double delay_spread_s,
                                    int max_taps);

/// Receiver-side view of a cluster CIR: taps accumulated onto the sampling
/// grid (nearest bin at sample_rate) and summed per bin. Sub-grid cluster
/// structure is not resolvable in-band; in-bin superposition is coherent, so
/// the output power carries the per-draw fade.
ChannelImpulseResponse quantize_to_grid(const ChannelImpulseResponse &cir,
                                        double sample_rate_hz);

} // namespace locsim
