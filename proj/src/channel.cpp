#include "locsim/channel.hpp"

#include "locsim/errors.hpp"
#include "locsim/units.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace locsim {

void LinkBudget::validate() const {
    if (tx_power_dbm <= -200.0 || !std::isfinite(tx_power_dbm))
        throw InvalidInput("tx_power_dbm out of range");
    if (carrier_hz <= 0 || bandwidth_hz <= 0 || scs_hz <= 0)
        throw InvalidInput("carrier, bandwidth and scs must be positive");
    if (noise_figure_db < 0 || shadow_std_db < 0)
        throw InvalidInput("noise figure and shadow std must be >= 0");
    if (n_subcarriers <= 0)
        throw InvalidInput("n_subcarriers must be positive");
    if (bandwidth_hz + 1e-9 < scs_hz * n_subcarriers)
        throw InvalidInput("bandwidth smaller than scs * n_subcarriers");
}

double ChannelImpulseResponse::total_power() const {
    double p = 0.0;
    for (const auto &g : tap_gains)
        p += std::norm(g);
    return p;
}

double path_loss_db(const LinkGeometry &geom) {
    const double R = geom.distance_3d_m;
    if (R <= 0.0)
        throw InvalidInput("link distance must be positive");
    if (geom.indoor_distance_2d_m < 0 || geom.n_floors < 0 ||
        geom.n_internal_walls < 0 || geom.n_external_walls < 0)
        throw InvalidInput("negative loss term in LinkGeometry");
    const double lg = std::log10(R);
    double pl = std::max(15.3 + 37.6 * lg, 38.46 + 20.0 * lg);
    pl += 0.7 * geom.indoor_distance_2d_m;
    if (geom.n_floors > 0) {
        const double n = geom.n_floors;
        pl += 18.3 * std::pow(n, (n + 2.0) / (n + 1.0) - 0.46);
    }
    pl += 5.0 * geom.n_internal_walls;
    pl += 20.0 * geom.n_external_walls;
    return pl;
}

double thermal_noise_dbm(double bandwidth_hz) {
    if (bandwidth_hz <= 0.0)
        throw InvalidInput("bandwidth must be positive");
    return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

double snr_db(const LinkBudget &budget, double path_loss_db_v,
              double shadow_db) {
    return budget.tx_power_dbm - path_loss_db_v - shadow_db -
           thermal_noise_dbm(budget.bandwidth_hz) - budget.noise_figure_db;
}

double sample_shadow_db(RngStream &rng, double shadow_std_db) {
    if (shadow_std_db < 0.0)
        throw InvalidInput("shadow std must be >= 0");
    if (shadow_std_db == 0.0)
        return 0.0;
    return shadow_std_db * rng.gaussian();
}

const std::vector<CdlTap> &cdl_a_profile() {
    // TR 38.901 Table 7.7.1-1 (CDL-A), also shipped as data/cdl_a_tr38901.csv.
    static const std::vector<CdlTap> table = {
        {0.0000, -13.4}, {0.3819, 0.0},   {0.4025, -2.2},  {0.5868, -4.0},
        {0.4610, -6.0},  {0.5375, -8.2},  {0.6708, -9.9},  {0.5750, -10.5},
        {0.7618, -7.5},  {1.5375, -15.9}, {1.8978, -6.6},  {2.2242, -16.7},
        {2.1718, -12.4}, {2.4942, -15.2}, {2.5119, -10.8}, {3.0582, -11.3},
        {4.0810, -12.7}, {4.4579, -16.2}, {4.5695, -18.3}, {4.7966, -18.9},
        {5.0066, -16.6}, {5.3043, -19.9}, {9.6586, -29.7}};
    return table;
}

ChannelImpulseResponse sample_cdl_a(RngStream &rng, double delay_spread_s,
                                    int max_taps) {
    if (delay_spread_s <= 0.0)
        throw InvalidInput("delay spread must be positive");
    if (max_taps < 1)
        throw InvalidInput("max_taps must be >= 1");

    const auto &table = cdl_a_profile();
    const int keep = std::min<int>(max_taps, static_cast<int>(table.size()));

    std::vector<int> idx(table.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return table[a].power_db > table[b].power_db;
    });
    idx.resize(keep);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return table[a].normalized_delay < table[b].normalized_delay;
    });

    ChannelImpulseResponse cir;
    cir.tap_delays_s.reserve(keep);
    cir.tap_gains.reserve(keep);
    double psum = 0.0;
    for (int i : idx)
        psum += db_to_linear(table[i].power_db);
    const double t0 = table[idx.front()].normalized_delay * delay_spread_s;
    for (int i : idx) {
        cir.tap_delays_s.push_back(table[i].normalized_delay * delay_spread_s -
                                   t0);
        const double p = db_to_linear(table[i].power_db) / psum;
        cir.tap_gains.push_back(std::sqrt(p) * rng.cgaussian());
    }
    const double tp = cir.total_power();
    if (tp <= 0.0) // all-zero draw has probability zero but guard anyway
        throw InvalidInput("degenerate CDL draw");
    const double scale = 1.0 / std::sqrt(tp);
    for (auto &g : cir.tap_gains)
        g *= scale;
    return cir;
}

ChannelImpulseResponse quantize_to_grid(const ChannelImpulseResponse &cir,
                                        double sample_rate_hz) {
    if (sample_rate_hz <= 0.0)
        throw InvalidInput("sample rate must be positive");
    if (cir.length() < 1)
        throw InvalidInput("empty CIR");
    std::map<long long, std::complex<double>> bins;
    for (int i = 0; i < cir.length(); ++i) {
        const long long b =
            std::llround(cir.tap_delays_s[i] * sample_rate_hz);
        bins[b] += cir.tap_gains[i];
    }
    // Taps falling into one bin superpose coherently; the resulting per-draw
    // power is the fade seen by the receiver and is deliberately kept.
    ChannelImpulseResponse out;
    const long long b0 = bins.begin()->first;
    for (const auto &[b, g] : bins) {
        out.tap_delays_s.push_back(static_cast<double>(b - b0) /
                                   sample_rate_hz);
        out.tap_gains.push_back(g);
    }
    if (out.total_power() == 0.0)
        throw InvalidInput("quantized CIR lost all power");
    return out;
}

} // namespace locsim
