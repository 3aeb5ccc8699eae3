#include "locsim/measurements.hpp"

#include "locsim/errors.hpp"

#include <cmath>

namespace locsim {

double nlos_bias_offset_m(double var_multipath_m2, double var_awgn_m2) {
    if (var_multipath_m2 < 0.0 || var_awgn_m2 < 0.0)
        throw InvalidInput("variances must be >= 0");
    const double diff = var_multipath_m2 - var_awgn_m2;
    if (diff >= 0.0)
        return std::sqrt(diff);
    const double scale = std::max(var_awgn_m2, var_multipath_m2);
    if (scale == 0.0 || diff >= -1e-9 * scale)
        return 0.0;
    throw InconsistentVariances(
        "var_multipath below var_awgn beyond numerical tolerance");
}

double synth_toa_awgn(const LinkModel &link, RngStream &rng) {
    if (link.var_awgn_m2 < 0.0)
        throw InvalidInput("negative variance");
    return link.true_range_m + std::sqrt(link.var_awgn_m2) * rng.gaussian();
}

double synth_toa_multipath(const LinkModel &link, RngStream &rng) {
    if (link.var_multipath_m2 < 0.0 || link.nlos_bias_m < 0.0)
        throw InvalidInput("negative variance or bias");
    return link.true_range_m + link.nlos_bias_m +
           std::sqrt(link.var_multipath_m2) * rng.gaussian();
}

TdoaSet form_tdoa(const ToaSet &toas, int reference_index) {
    const int B = static_cast<int>(toas.values_m.size());
    if (B < 2 || toas.variances_m2.size() != toas.values_m.size())
        throw InvalidInput("need >= 2 TOAs with matching variances");
    if (reference_index < 0 || reference_index >= B)
        throw InvalidReference("reference index out of range");
    for (double v : toas.variances_m2)
        if (v <= 0.0)
            throw InvalidInput("TOA variances must be positive");

    TdoaSet out;
    out.reference_index = reference_index;
    out.values_m.reserve(B - 1);
    Eigen::VectorXd var(B - 1);
    int r = 0;
    for (int b = 0; b < B; ++b) {
        if (b == reference_index)
            continue;
        out.values_m.push_back(toas.values_m[b] -
                               toas.values_m[reference_index]);
        var(r++) = toas.variances_m2[b];
    }
    out.covariance =
        Eigen::MatrixXd(var.asDiagonal()) +
        toas.variances_m2[reference_index] *
            Eigen::MatrixXd::Ones(B - 1, B - 1);
    return out;
}

int select_reference(const std::vector<double> &snrs) {
    if (snrs.empty())
        throw InvalidInput("empty SNR list");
    int best = 0;
    for (int i = 1; i < static_cast<int>(snrs.size()); ++i)
        if (snrs[i] > snrs[best])
            best = i;
    return best;
}

WeightVector projection_weights(const std::vector<double> &variances_m2) {
    if (variances_m2.empty())
        throw InvalidInput("empty variance list");
    WeightVector w;
    w.weights.resize(variances_m2.size());
    double sum = 0.0;
    for (double v : variances_m2) {
        if (v <= 0.0)
            throw InvalidInput("variances must be positive");
        sum += 1.0 / v;
    }
    for (std::size_t i = 0; i < variances_m2.size(); ++i)
        w.weights[i] = (1.0 / variances_m2[i]) / sum;
    return w;
}

TwToaSet synth_twtoa(const std::vector<TwToaLink> &links, RngStream &rng) {
    TwToaSet out;
    out.pairs.reserve(links.size());
    for (const auto &l : links) {
        if (l.ue_i == l.ue_j)
            throw InvalidInput("TW-TOA pair must join distinct UEs");
        if (l.variance_m2 <= 0.0)
            throw InvalidInput("TW-TOA variance must be positive");
        TwToaPair p;
        p.ue_i = l.ue_i;
        p.ue_j = l.ue_j;
        p.variance_m2 = l.variance_m2;
        p.range_m = l.true_range_m + std::sqrt(l.variance_m2) * rng.gaussian();
        out.pairs.push_back(p);
    }
    return out;
}

} // namespace locsim
