#include "locsim/analysis.hpp"

#include "locsim/crlb.hpp"
#include "locsim/errors.hpp"

#include <cmath>

namespace locsim {

namespace {

Eigen::MatrixXd pd_inverse(const Eigen::MatrixXd &m, const char *what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const auto &ev = es.eigenvalues();
    if (ev(0) <= 0.0 || ev(ev.size() - 1) / ev(0) > 1e12)
        throw SingularFim(what);
    return es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
           es.eigenvectors().transpose();
}

std::array<double, 2> eig2(const Eigen::Matrix2d &m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

} // namespace

EstimatorStats cov_mse_tswpm(const Eigen::MatrixXd &h2,
                             const Eigen::VectorXd &c2_diag) {
    if (h2.cols() != 3 || h2.rows() != c2_diag.size())
        throw InvalidInput("h2 must be B x 3 with matching variance vector");
    for (int i = 0; i < c2_diag.size(); ++i)
        if (c2_diag(i) <= 0.0)
            throw InvalidInput("variances must be positive");

    const Eigen::VectorXd inv = c2_diag.cwiseInverse();
    const double tr = inv.sum();
    const Eigen::Matrix3d f2 =
        h2.transpose() * inv.asDiagonal() * h2; // H2^T C2^-1 H2
    const Eigen::Matrix2d efim = efim_schur(f2);

    EstimatorStats st;
    st.covariance = efim / (tr * tr);
    st.eigenvalues = eig2(efim);
    st.mse = (st.eigenvalues[0] + st.eigenvalues[1]) / (tr * tr);
    return st;
}

EstimatorStats cov_mse_wnls(const Eigen::MatrixXd &h1,
                            const Eigen::MatrixXd &c1) {
    if (h1.cols() != 2 || h1.rows() != c1.rows() || c1.rows() != c1.cols())
        throw InvalidInput("h1 must be (B-1) x 2 with square covariance");
    const Eigen::MatrixXd c1inv = pd_inverse(c1, "TDOA covariance singular");
    const Eigen::Matrix2d fim = h1.transpose() * c1inv * h1;
    const auto ev = eig2(fim);
    if (ev[0] <= 0.0)
        throw SingularFim("H1^T C1^-1 H1 singular");

    EstimatorStats st;
    st.covariance = fim.inverse();
    st.eigenvalues = ev;
    st.mse = 1.0 / ev[0] + 1.0 / ev[1];
    return st;
}

Eigen::Matrix2d mle_cov_two_stage(const Eigen::MatrixXd &j,
                                  const Eigen::MatrixXd &c1,
                                  const Eigen::VectorXd &u) {
    if (j.cols() != 2 || j.rows() != c1.rows() || u.size() != c1.rows())
        throw InvalidInput("dimension mismatch in mle_cov_two_stage");
    const Eigen::MatrixXd c1inv = pd_inverse(c1, "TDOA covariance singular");
    const double denom = u.dot(c1inv * u);
    if (denom <= 0.0)
        throw SingularFim("u^T C1^-1 u must be positive");
    const Eigen::Vector2d cross = j.transpose() * (c1inv * u);
    const Eigen::Matrix2d info =
        j.transpose() * c1inv * j - (cross * cross.transpose()) / denom;
    const auto ev = eig2(info);
    if (ev[0] <= 0.0 || ev[1] / ev[0] > 1e12)
        throw SingularFim("two-stage information matrix singular");
    return info.inverse();
}

std::pair<double, double>
mse_high_gdop_approx(const std::vector<double> &variances_m2,
                     const Eigen::MatrixXd &h1, const Eigen::MatrixXd &c1) {
    double s = 0.0;
    for (double v : variances_m2) {
        if (v <= 0.0)
            throw InvalidInput("variances must be positive");
        s += 1.0 / v;
    }
    const Eigen::MatrixXd c1inv = pd_inverse(c1, "TDOA covariance singular");
    const Eigen::Matrix2d fim = h1.transpose() * c1inv * h1;
    const auto ev = eig2(fim);
    if (ev[0] <= 0.0)
        throw SingularFim("lambda_min of H1^T C1^-1 H1 is zero");
    return {1.0 / s, 1.0 / ev[0]};
}

double trace_normalization(const Eigen::MatrixXd &h1,
                           const Eigen::MatrixXd &w1) {
    if (h1.rows() != w1.rows() || w1.rows() != w1.cols())
        throw InvalidInput("dimension mismatch in trace_normalization");
    const double tr = (h1.transpose() * w1 * h1).trace();
    if (tr == 0.0)
        throw InvalidInput("zero trace");
    return 1.0 / tr;
}

} // namespace locsim
