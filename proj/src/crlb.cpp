#include "locsim/crlb.hpp"

#include "locsim/errors.hpp"
#include "locsim/kernels.hpp"
#include "locsim/units.hpp"

#include <cmath>
#include <numbers>

namespace locsim {

using kern::cd;

void PrsGrid::validate() const {
    if (n <= 0 || n % 2 != 0)
        throw InvalidInput("PRS grid size must be positive and even");
    if (scs_hz <= 0.0)
        throw InvalidInput("subcarrier spacing must be positive");
    if (static_cast<int>(symbols.size()) != n)
        throw InvalidInput("PRS symbol count does not match N");
    for (const auto &s : symbols)
        if (std::abs(std::norm(s) - 1.0) > 1e-9)
            throw InvalidInput("PRS symbols must be unit-modulus");
}

PrsGrid make_qpsk_grid(RngStream &rng, int n, double scs_hz) {
    PrsGrid grid;
    grid.n = n;
    grid.scs_hz = scs_hz;
    grid.symbols.reserve(n > 0 ? n : 0);
    const double r = std::numbers::sqrt2 / 2.0;
    for (int i = 0; i < n; ++i) {
        const int q = static_cast<int>(rng.next_u64() & 3u);
        const double re = (q & 1) ? -r : r;
        const double im = (q & 2) ? -r : r;
        grid.symbols.emplace_back(re, im);
    }
    grid.validate();
    return grid;
}

double fim_toa_multipath(const ChannelImpulseResponse &cir, const PrsGrid &prs,
                         double snr_linear) {
    prs.validate();
    if (snr_linear <= 0.0)
        throw InvalidInput("snr must be positive");
    const int L = cir.length();
    const int N = prs.n;
    if (L < 1 || L >= N)
        throw InvalidInput("CIR length must satisfy 1 <= L < N");

    const auto &k = kern::kernels();
    const double two_pi_scs = 2.0 * std::numbers::pi * prs.scs_hz;

    // D entries at physical subcarrier indices -N/2 .. N/2-1.
    std::vector<double> d(N);
    for (int i = 0; i < N; ++i)
        d[i] = two_pi_scs * (i - N / 2);

    // Columns of P = X F_L: unit-modulus phase ramps times the PRS symbols.
    // Each ramp is generated by a rotation recurrence (one polar() per tap).
    std::vector<cd> P(static_cast<std::size_t>(N) * L);
    for (int l = 0; l < L; ++l) {
        const double tau = cir.tap_delays_s[l];
        const cd step = std::polar(1.0, -two_pi_scs * tau);
        cd ramp = std::polar(1.0, two_pi_scs * tau * (N / 2));
        cd *col = &P[static_cast<std::size_t>(l) * N];
        for (int i = 0; i < N; ++i) {
            col[i] = prs.symbols[i] * ramp;
            ramp *= step;
        }
    }

    // y = P h, t = D y
    std::vector<cd> y(N, cd{0.0, 0.0});
    for (int l = 0; l < L; ++l)
        k.axpy_cd(cir.tap_gains[l], &P[static_cast<std::size_t>(l) * N],
                  y.data(), N);
    std::vector<cd> t(N);
    k.cmul_d(d.data(), y.data(), t.data(), N);

    const double main_term = k.sumsq_cd(t.data(), N);

    Eigen::MatrixXcd gram(L, L);
    Eigen::VectorXcd w(L);
    for (int l = 0; l < L; ++l) {
        const cd *cl = &P[static_cast<std::size_t>(l) * N];
        w(l) = k.dot_cd(cl, t.data(), N);
        for (int m = l; m < L; ++m) {
            const cd g = k.dot_cd(cl, &P[static_cast<std::size_t>(m) * N], N);
            gram(l, m) = g;
            gram(m, l) = std::conj(g);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    const auto &ev = es.eigenvalues();
    if (ev(0) <= 0.0 || ev(L - 1) / ev(0) > 1e12)
        throw SingularChannel("channel basis Gram matrix is singular");

    const Eigen::VectorXcd z = es.eigenvectors() *
                               (es.eigenvalues().cwiseInverse().asDiagonal() *
                                (es.eigenvectors().adjoint() * w));
    const double proj = w.dot(z).real(); // Eigen's dot conjugates the lhs
    // Xi is an orthogonal projector, so the value is nonnegative up to
    // rounding; clamp the rounding.
    return 2.0 * snr_linear * std::max(main_term - proj, 0.0);
}

double fim_toa_awgn(double snr_linear, double scs_hz, int n) {
    if (snr_linear <= 0.0 || scs_hz <= 0.0)
        throw InvalidInput("snr and scs must be positive");
    if (n <= 0 || n % 2 != 0)
        throw InvalidInput("N must be positive and even");
    const double two_pi_scs = 2.0 * std::numbers::pi * scs_hz;
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i)
        d[i] = two_pi_scs * (i - n / 2);
    return 2.0 * snr_linear * kern::kernels().sumsq_d(d.data(), n);
}

double toa_variance_m2(double fim_toa) {
    if (fim_toa < 0.0)
        throw InvalidInput("negative Fisher information");
    if (fim_toa == 0.0)
        throw InfiniteVariance("zero Fisher information");
    return kSpeedOfLight * kSpeedOfLight / fim_toa;
}

Eigen::MatrixXd fim_tdoa_from_toa(const std::vector<double> &toa_variances_m2,
                                  const Eigen::MatrixXd &transform) {
    const int b = static_cast<int>(toa_variances_m2.size());
    if (transform.cols() != b || transform.rows() != b - 1)
        throw InvalidInput("transform must be (B-1) x B");
    for (double v : toa_variances_m2)
        if (v <= 0.0)
            throw InvalidInput("TOA variances must be positive");
    Eigen::VectorXd var =
        Eigen::Map<const Eigen::VectorXd>(toa_variances_m2.data(), b);
    const Eigen::MatrixXd cov =
        transform * var.asDiagonal() * transform.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const auto &ev = es.eigenvalues();
    if (ev(0) <= 0.0 || ev(b - 2) / ev(0) > 1e12)
        throw SingularCovariance("TDOA covariance is numerically singular");
    return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

Eigen::MatrixXd fim_position(const Eigen::MatrixXd &jacobian,
                             const Eigen::MatrixXd &meas_fim) {
    if (jacobian.rows() != meas_fim.rows() ||
        meas_fim.rows() != meas_fim.cols())
        throw InvalidInput("dimension mismatch in fim_position");
    return jacobian.transpose() * meas_fim * jacobian;
}

Eigen::Matrix2d efim_schur(const Eigen::Matrix3d &full_fim) {
    const double c = full_fim(2, 2);
    if (c <= 0.0)
        throw SingularNuisanceBlock("nuisance block must be positive");
    const Eigen::Vector2d b = full_fim.block<2, 1>(0, 2);
    return full_fim.topLeftCorner<2, 2>() - (b * b.transpose()) / c;
}

double peb_m(const Eigen::Matrix2d &fim) {
    const double det = fim.determinant();
    if (!(det > 0.0) || !(fim.trace() > 0.0))
        throw SingularFim("position FIM is not invertible");
    return std::sqrt(fim.inverse().trace());
}

Eigen::MatrixXd tdoa_transform(int n_anchors, int reference_index) {
    if (n_anchors < 2)
        throw InvalidInput("need at least two anchors");
    if (reference_index < 0 || reference_index >= n_anchors)
        throw InvalidReference("reference index out of range");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n_anchors - 1, n_anchors);
    int r = 0;
    for (int b = 0; b < n_anchors; ++b) {
        if (b == reference_index)
            continue;
        T(r, b) = 1.0;
        T(r, reference_index) = -1.0;
        ++r;
    }
    return T;
}

} // namespace locsim
