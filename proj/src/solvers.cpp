#include "locsim/solvers.hpp"

#include "locsim/errors.hpp"

#include <algorithm>
#include <cmath>

namespace locsim {

void SolverConfig::validate() const {
    if (epsilon <= 0.0)
        throw InvalidInput("epsilon must be positive");
    if (consecutive_hits < 1)
        throw InvalidInput("consecutive_hits must be >= 1");
    if (max_iterations < consecutive_hits)
        throw InvalidInput("max_iterations must be >= consecutive_hits");
    if (regularization < 0.0)
        throw InvalidInput("regularization must be >= 0");
}

namespace {

// TDOA values expanded to one entry per anchor with 0 at the reference.
std::vector<double> expand_tdoa(const TdoaSet &tdoa, int n_anchors) {
    if (static_cast<int>(tdoa.values_m.size()) != n_anchors - 1)
        throw InvalidInput("TDOA count does not match anchor count");
    if (tdoa.reference_index < 0 || tdoa.reference_index >= n_anchors)
        throw InvalidReference("TDOA reference index out of range");
    std::vector<double> full(n_anchors, 0.0);
    int r = 0;
    for (int b = 0; b < n_anchors; ++b) {
        if (b == tdoa.reference_index)
            continue;
        full[b] = tdoa.values_m[r++];
    }
    return full;
}

void ranges_from(const std::vector<Position> &anchors, Position theta,
                 std::vector<double> &d, OpCounter &ops) {
    for (std::size_t b = 0; b < anchors.size(); ++b) {
        const double dx = theta.x - anchors[b].x;
        const double dy = theta.y - anchors[b].y;
        d[b] = std::sqrt(dx * dx + dy * dy);
        ops.scalar_madds += 3; // 2 mul + 1 sqrt
        if (d[b] == 0.0)
            throw DegenerateGeometry("iterate landed on an anchor");
    }
}

// Convergence counter shared by every solver: |R^k - R^{k-1}| < eps for l
// consecutive iterations.
struct StopRule {
    const SolverConfig &cfg;
    double r_prev;
    int hits = 0;

    bool step(double r) {
        if (std::abs(r - r_prev) < cfg.epsilon) {
            if (++hits >= cfg.consecutive_hits)
                return true;
        } else {
            hits = 0;
        }
        r_prev = r;
        return false;
    }
};

// Closed-form condition number of a symmetric 2x2 matrix.
double cond2x2(const Eigen::Matrix2d &m) {
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
    const double lmax = tr / 2.0 + disc;
    const double lmin = tr / 2.0 - disc;
    if (lmin <= 0.0)
        return std::numeric_limits<double>::infinity();
    return lmax / lmin;
}

// C1^-1 of the diag + rank-one TDOA covariance via Sherman-Morrison.
Eigen::MatrixXd tdoa_cov_inverse(const Eigen::MatrixXd &cov) {
    const int m = static_cast<int>(cov.rows());
    if (m == 1)
        return Eigen::MatrixXd::Constant(1, 1, 1.0 / cov(0, 0));
    const double s_ref = cov(0, 1); // off-diagonal = reference variance
    Eigen::VectorXd dinv(m);
    for (int i = 0; i < m; ++i) {
        const double di = cov(i, i) - s_ref;
        if (di <= 0.0 || s_ref < 0.0)
            throw SingularCovariance("TDOA covariance is not diag + rank-one PD");
        dinv(i) = 1.0 / di;
    }
    const double denom = 1.0 + s_ref * dinv.sum();
    return Eigen::MatrixXd(dinv.asDiagonal()) -
           (s_ref / denom) * (dinv * dinv.transpose());
}

} // namespace

Position nearest_anchor_init(const AnchorSet &anchors, Position ue_hint) {
    int nearest = 0;
    double best = distance(anchors.positions[0], ue_hint);
    for (int b = 1; b < anchors.size(); ++b) {
        const double d = distance(anchors.positions[b], ue_hint);
        if (d < best) {
            best = d;
            nearest = b;
        }
    }
    Position c{0.0, 0.0};
    for (const auto &a : anchors.positions) {
        c.x += a.x;
        c.y += a.y;
    }
    c.x /= anchors.size();
    c.y /= anchors.size();
    const Position a = anchors.positions[nearest];
    double nx = c.x - a.x, ny = c.y - a.y;
    const double nn = std::hypot(nx, ny);
    if (nn == 0.0) { // centroid on the anchor: nudge along +x
        nx = 1.0;
        ny = 0.0;
    } else {
        nx /= nn;
        ny /= nn;
    }
    return {a.x + 1e-6 * nx, a.y + 1e-6 * ny};
}

SolverResult ts_wpm(const TdoaSet &tdoa, const AnchorSet &anchors,
                    const WeightVector &weights, const SolverConfig &cfg,
                    Position init, double init_range_m) {
    cfg.validate();
    const int B = anchors.size();
    if (B < 3)
        throw InvalidInput("ts_wpm needs at least 3 anchors");
    if (static_cast<int>(weights.weights.size()) != B)
        throw InvalidInput("weight count does not match anchor count");
    const std::vector<double> rt = expand_tdoa(tdoa, B);
    const auto &A = anchors.positions;

    SolverResult res;
    res.estimate = init;
    res.range_estimate_m = init_range_m;

    std::vector<double> d(B), d_new(B);
    ranges_from(A, init, d, res.ops);

    // R^0 over all B anchors (reference term uses rt = 0).
    double r0 = 0.0;
    for (int b = 0; b < B; ++b) {
        const double e = rt[b] - (d[b] - init_range_m);
        r0 += e * e;
        res.ops.scalar_madds += 1;
    }
    r0 /= B;
    res.ops.scalar_madds += 1;

    StopRule stop{cfg, r0};
    Position theta = init;
    double r1e = init_range_m;

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        // position update from theta^{k-1}, r1e^{k-1}
        Position next{0.0, 0.0};
        for (int b = 0; b < B; ++b) {
            const double radial = rt[b] + r1e;
            const double ux = (theta.x - A[b].x) / d[b];
            const double uy = (theta.y - A[b].y) / d[b];
            next.x += weights.weights[b] * (A[b].x + radial * ux);
            next.y += weights.weights[b] * (A[b].y + radial * uy);
            res.ops.scalar_madds += 6; // 2 div + 4 mul
        }

        ranges_from(A, next, d_new, res.ops);
        double rk = 0.0;
        for (int b = 0; b < B; ++b) {
            const double e = rt[b] - (d_new[b] - r1e);
            rk += e * e;
            res.ops.scalar_madds += 1;
        }
        rk /= B;
        res.ops.scalar_madds += 1;
        res.residual_trace.push_back(rk);
        res.iterations = k;

        if (stop.step(rk)) {
            res.converged = true;
            res.estimate = next;
            return res;
        }

        // range refinement from theta^{k-1}
        double r1e_next = 0.0;
        for (int b = 0; b < B; ++b) {
            r1e_next += weights.weights[b] * (d[b] - rt[b]);
            res.ops.scalar_madds += 1;
        }
        r1e = r1e_next;
        res.range_estimate_m = r1e;
        theta = next;
        d.swap(d_new);
        res.estimate = theta;
    }
    return res; // converged stays false: iteration cap reached
}

namespace {

SolverResult gauss_newton_tdoa(const TdoaSet &tdoa, const AnchorSet &anchors,
                               const SolverConfig &cfg, Position init,
                               bool weighted) {
    cfg.validate();
    const int B = anchors.size();
    if (B < 3)
        throw InvalidInput("wnls/nls needs at least 3 anchors");
    if (static_cast<int>(tdoa.values_m.size()) != B - 1)
        throw InvalidInput("TDOA count does not match anchor count");
    const int ref = tdoa.reference_index;
    const auto &A = anchors.positions;

    Eigen::MatrixXd W;
    if (weighted) {
        if (tdoa.covariance.rows() != B - 1 || tdoa.covariance.cols() != B - 1)
            throw InvalidInput("TDOA covariance has wrong dimensions");
        W = tdoa_cov_inverse(tdoa.covariance);
    } else {
        W = Eigen::MatrixXd::Identity(B - 1, B - 1);
    }

    SolverResult res;
    res.estimate = init;
    Eigen::Vector2d theta(init.x, init.y);
    const Eigen::VectorXd z =
        Eigen::Map<const Eigen::VectorXd>(tdoa.values_m.data(), B - 1);

    StopRule stop{cfg, 0.0};
    bool have_r = false;

    std::vector<double> d(B);
    for (int k = 1; k <= cfg.max_iterations; ++k) {
        Position cur{theta(0), theta(1)};
        ranges_from(A, cur, d, res.ops);

        Eigen::VectorXd r(B - 1);
        Eigen::MatrixXd H(B - 1, 2);
        int row = 0;
        for (int b = 0; b < B; ++b) {
            if (b == ref)
                continue;
            r(row) = z(row) - (d[b] - d[ref]);
            H(row, 0) = (theta(0) - A[b].x) / d[b] - (theta(0) - A[ref].x) / d[ref];
            H(row, 1) = (theta(1) - A[b].y) / d[b] - (theta(1) - A[ref].y) / d[ref];
            res.ops.scalar_madds += 4;
            ++row;
        }

        const Eigen::MatrixXd HtW = H.transpose() * W;
        res.ops.scalar_madds += 2 * (B - 1) * (B - 1);
        Eigen::Matrix2d N = HtW * H;
        res.ops.scalar_madds += 4 * (B - 1);
        if (cfg.regularization > 0.0)
            N += cfg.regularization * Eigen::Matrix2d::Identity();
        else if (cond2x2(N) > 1e12)
            throw IllConditioned("normal matrix condition number above 1e12");

        const Eigen::Matrix2d Ninv = N.inverse();
        res.ops.matrix_inversions += 1;
        theta += Ninv * (HtW * r);
        res.ops.scalar_madds += 2 * (B - 1) + 4;

        const double rk = r.dot(W * r) / (B - 1);
        res.ops.scalar_madds += (B - 1) * (B - 1) + (B - 1) + 1;
        res.residual_trace.push_back(rk);
        res.iterations = k;
        res.estimate = {theta(0), theta(1)};

        if (!have_r) {
            stop.r_prev = rk;
            have_r = true;
            continue;
        }
        if (stop.step(rk)) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

} // namespace

SolverResult wnls(const TdoaSet &tdoa, const AnchorSet &anchors,
                  const SolverConfig &cfg, Position init) {
    return gauss_newton_tdoa(tdoa, anchors, cfg, init, true);
}

SolverResult nls(const TdoaSet &tdoa, const AnchorSet &anchors,
                 const SolverConfig &cfg, Position init) {
    return gauss_newton_tdoa(tdoa, anchors, cfg, init, false);
}

SolverResult ippm(const TdoaSet &tdoa, const AnchorSet &anchors,
                  const SolverConfig &cfg, Position init) {
    cfg.validate();
    const int B = anchors.size();
    if (B < 3)
        throw InvalidInput("ippm needs at least 3 anchors");
    const std::vector<double> rt = expand_tdoa(tdoa, B);
    const auto &A = anchors.positions;
    const int ref = tdoa.reference_index;
    const double wb = 1.0 / B;

    SolverResult res;
    res.estimate = init;

    std::vector<double> d(B), d_new(B);
    ranges_from(A, init, d, res.ops);
    double r0 = 0.0;
    for (int b = 0; b < B; ++b) {
        const double e = rt[b] - (d[b] - d[ref]);
        r0 += e * e;
        res.ops.scalar_madds += 1;
    }
    r0 /= B;

    StopRule stop{cfg, r0};
    Position theta = init;

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        Position next{0.0, 0.0};
        const double rref = d[ref];
        for (int b = 0; b < B; ++b) {
            const double radial = rt[b] + rref;
            const double ux = (theta.x - A[b].x) / d[b];
            const double uy = (theta.y - A[b].y) / d[b];
            next.x += wb * (A[b].x + radial * ux);
            next.y += wb * (A[b].y + radial * uy);
            res.ops.scalar_madds += 6;
        }
        ranges_from(A, next, d_new, res.ops);
        double rk = 0.0;
        for (int b = 0; b < B; ++b) {
            const double e = rt[b] - (d_new[b] - d_new[ref]);
            rk += e * e;
            res.ops.scalar_madds += 1;
        }
        rk /= B;
        res.residual_trace.push_back(rk);
        res.iterations = k;
        res.estimate = next;
        if (stop.step(rk)) {
            res.converged = true;
            return res;
        }
        theta = next;
        d.swap(d_new);
    }
    return res;
}

namespace {

struct CoopWeights {
    std::vector<double> anchor; // weight per anchor
    std::vector<double> coop;   // weight per neighbor
    double anchor_scale = 1.0;  // prefactor applied to the anchor sum
    double coop_scale = 1.0;    // prefactor applied to the coop sum
};

CoopWeights coop_weights(const CoopUe &ue, CoopAnchorScaling mode) {
    const int B = ue.anchors.size();
    const int S = static_cast<int>(ue.neighbors.size());
    CoopWeights w;
    w.anchor.resize(B);
    w.coop.resize(S);
    if (mode == CoopAnchorScaling::as_printed) {
        double sa = 0.0;
        for (double v : ue.anchor_variances_m2)
            sa += 1.0 / v;
        for (int b = 0; b < B; ++b)
            w.anchor[b] = (1.0 / ue.anchor_variances_m2[b]) / sa;
        double sc = 0.0;
        for (const auto &nb : ue.neighbors)
            sc += 1.0 / nb.variance_m2;
        for (int i = 0; i < S; ++i)
            w.coop[i] = (1.0 / ue.neighbors[i].variance_m2) / sc;
        w.anchor_scale = 1.0 / B;
        w.coop_scale = S > 0 ? 1.0 / S : 0.0;
    } else {
        // one inverse-variance normalization across anchors and neighbors
        double s = 0.0;
        for (double v : ue.anchor_variances_m2)
            s += 1.0 / v;
        for (const auto &nb : ue.neighbors)
            s += 1.0 / nb.variance_m2;
        for (int b = 0; b < B; ++b)
            w.anchor[b] = (1.0 / ue.anchor_variances_m2[b]) / s;
        for (int i = 0; i < S; ++i)
            w.coop[i] = (1.0 / ue.neighbors[i].variance_m2) / s;
    }
    return w;
}

// Range-refinement weights are always the anchor-only normalization.
std::vector<double> anchor_only_weights(const CoopUe &ue) {
    std::vector<double> w(ue.anchors.size());
    double s = 0.0;
    for (double v : ue.anchor_variances_m2)
        s += 1.0 / v;
    for (std::size_t b = 0; b < w.size(); ++b)
        w[b] = (1.0 / ue.anchor_variances_m2[b]) / s;
    return w;
}

void validate_coop(const CoopScenario &scn) {
    const int n = static_cast<int>(scn.ues.size());
    for (int i = 0; i < n; ++i) {
        const auto &ue = scn.ues[i];
        if (ue.anchors.size() < 2)
            throw InvalidInput("cooperative UE needs at least 2 anchors");
        if (ue.anchors.size() + static_cast<int>(ue.neighbors.size()) < 3)
            throw InvalidInput("anchors + |S_n| must be >= 3");
        if (static_cast<int>(ue.anchor_variances_m2.size()) != ue.anchors.size())
            throw InvalidInput("anchor variance count mismatch");
        for (double v : ue.anchor_variances_m2)
            if (v <= 0.0)
                throw InvalidInput("anchor variances must be positive");
        for (const auto &nb : ue.neighbors) {
            if (nb.ue == i)
                throw InvalidInput("cooperation set must exclude the UE itself");
            if (nb.ue < 0 || nb.ue >= n)
                throw InvalidInput("cooperation set references unknown UE");
            if (nb.variance_m2 <= 0.0)
                throw InvalidInput("TW-TOA variances must be positive");
        }
    }
}

} // namespace

std::vector<SolverResult> ts_wpm_coop(const CoopScenario &scn,
                                      const SolverConfig &cfg,
                                      const std::vector<Position> &init,
                                      const std::vector<double> &init_range_m) {
    cfg.validate();
    validate_coop(scn);
    const int n = static_cast<int>(scn.ues.size());
    if (static_cast<int>(init.size()) != n ||
        static_cast<int>(init_range_m.size()) != n)
        throw InvalidInput("per-UE inits required");

    std::vector<SolverResult> out(n);
    std::vector<CoopWeights> w(n);
    std::vector<std::vector<double>> rw(n);
    std::vector<std::vector<double>> rt(n);
    std::vector<Position> theta(init), theta_next(init);
    std::vector<double> r1e(init_range_m);
    std::vector<double> r_prev(n);
    std::vector<int> hits(n, 0);
    std::vector<bool> done(n, false);

    for (int i = 0; i < n; ++i) {
        const auto &ue = scn.ues[i];
        w[i] = coop_weights(ue, cfg.coop_anchor_scaling);
        rw[i] = anchor_only_weights(ue);
        rt[i] = expand_tdoa(ue.tdoa, ue.anchors.size());
        out[i].estimate = init[i];
        out[i].range_estimate_m = init_range_m[i];
    }

    auto residual = [&](int i, Position p, double range,
                        const std::vector<Position> &nbr_state) {
        const auto &ue = scn.ues[i];
        const int B = ue.anchors.size();
        double ra = 0.0;
        for (int b = 0; b < B; ++b) {
            const double db = distance(p, ue.anchors.positions[b]);
            const double e = rt[i][b] - (db - range);
            ra += e * e;
            out[i].ops.scalar_madds += 4;
        }
        ra /= B;
        if (!ue.neighbors.empty()) {
            double rc = 0.0;
            for (const auto &nb : ue.neighbors) {
                const double e = nb.range_m - distance(p, nbr_state[nb.ue]);
                rc += e * e;
                out[i].ops.scalar_madds += 4;
            }
            ra += rc / static_cast<double>(ue.neighbors.size());
        }
        return ra;
    };

    for (int i = 0; i < n; ++i)
        r_prev[i] = residual(i, theta[i], r1e[i], theta);

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        bool all_done = true;
        for (int i = 0; i < n; ++i) {
            if (done[i]) {
                theta_next[i] = theta[i];
                continue;
            }
            all_done = false;
            const auto &ue = scn.ues[i];
            const int B = ue.anchors.size();

            Position acc{0.0, 0.0};
            for (int b = 0; b < B; ++b) {
                const auto &a = ue.anchors.positions[b];
                const double dx = theta[i].x - a.x;
                const double dy = theta[i].y - a.y;
                const double db = std::sqrt(dx * dx + dy * dy);
                out[i].ops.scalar_madds += 3;
                if (db == 0.0) {
                    out[i].failed = true;
                    out[i].failure = "degenerate geometry";
                    done[i] = true;
                    break;
                }
                const double radial = rt[i][b] + r1e[i];
                acc.x += w[i].anchor[b] * (a.x + radial * dx / db);
                acc.y += w[i].anchor[b] * (a.y + radial * dy / db);
                out[i].ops.scalar_madds += 6;
            }
            if (done[i]) {
                theta_next[i] = theta[i];
                continue;
            }
            if (cfg.coop_anchor_scaling == CoopAnchorScaling::as_printed) {
                acc.x *= w[i].anchor_scale;
                acc.y *= w[i].anchor_scale;
                out[i].ops.scalar_madds += 2;
            }
            if (!ue.neighbors.empty()) {
                Position cacc{0.0, 0.0};
                for (std::size_t s = 0; s < ue.neighbors.size(); ++s) {
                    const auto &nb = ue.neighbors[s];
                    const Position pu = theta[nb.ue];
                    const double dx = theta[i].x - pu.x;
                    const double dy = theta[i].y - pu.y;
                    const double du = std::sqrt(dx * dx + dy * dy);
                    out[i].ops.scalar_madds += 3;
                    if (du == 0.0) {
                        out[i].failed = true;
                        out[i].failure = "degenerate cooperative geometry";
                        done[i] = true;
                        break;
                    }
                    cacc.x += w[i].coop[s] * (pu.x + nb.range_m * dx / du);
                    cacc.y += w[i].coop[s] * (pu.y + nb.range_m * dy / du);
                    out[i].ops.scalar_madds += 6;
                }
                if (done[i]) {
                    theta_next[i] = theta[i];
                    continue;
                }
                if (cfg.coop_anchor_scaling == CoopAnchorScaling::as_printed) {
                    cacc.x *= w[i].coop_scale;
                    cacc.y *= w[i].coop_scale;
                    out[i].ops.scalar_madds += 2;
                }
                acc.x += cacc.x;
                acc.y += cacc.y;
            }

            const double rk = residual(i, acc, r1e[i], theta);
            out[i].residual_trace.push_back(rk);
            out[i].iterations = k;
            out[i].estimate = acc;

            if (std::abs(rk - r_prev[i]) < cfg.epsilon) {
                if (++hits[i] >= cfg.consecutive_hits) {
                    out[i].converged = true;
                    done[i] = true;
                    theta_next[i] = acc;
                    r_prev[i] = rk;
                    continue;
                }
            } else {
                hits[i] = 0;
            }
            r_prev[i] = rk;

            // range refinement from theta^{k-1}
            double rnew = 0.0;
            for (int b = 0; b < B; ++b) {
                const double db = distance(theta[i], ue.anchors.positions[b]);
                rnew += rw[i][b] * (db - rt[i][b]);
                out[i].ops.scalar_madds += 4;
            }
            if (cfg.coop_anchor_scaling == CoopAnchorScaling::as_printed)
                rnew /= B;
            r1e[i] = rnew;
            out[i].range_estimate_m = rnew;
            theta_next[i] = acc;
        }
        theta = theta_next;
        if (all_done)
            break;
    }
    return out;
}

std::vector<SolverResult> wnls_coop(const CoopScenario &scn,
                                    const SolverConfig &cfg,
                                    const std::vector<Position> &init) {
    cfg.validate();
    validate_coop(scn);
    const int n = static_cast<int>(scn.ues.size());
    if (static_cast<int>(init.size()) != n)
        throw InvalidInput("per-UE inits required");

    std::vector<SolverResult> out(n);
    std::vector<Eigen::MatrixXd> W(n);
    std::vector<Position> theta(init), theta_next(init);
    std::vector<double> r_prev(n, 0.0);
    std::vector<int> hits(n, 0);
    std::vector<bool> done(n, false), have_r(n, false);

    for (int i = 0; i < n; ++i) {
        out[i].estimate = init[i];
        W[i] = tdoa_cov_inverse(scn.ues[i].tdoa.covariance);
    }

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        bool all_done = true;
        for (int i = 0; i < n; ++i) {
            if (done[i]) {
                theta_next[i] = theta[i];
                continue;
            }
            all_done = false;
            const auto &ue = scn.ues[i];
            const int B = ue.anchors.size();
            const int S = static_cast<int>(ue.neighbors.size());
            const int ref = ue.tdoa.reference_index;
            const int rows = B - 1 + S;

            std::vector<double> d(B);
            bool degenerate = false;
            for (int b = 0; b < B; ++b) {
                d[b] = distance(theta[i], ue.anchors.positions[b]);
                out[i].ops.scalar_madds += 3;
                if (d[b] == 0.0)
                    degenerate = true;
            }
            if (degenerate) {
                out[i].failed = true;
                out[i].failure = "degenerate geometry";
                done[i] = true;
                theta_next[i] = theta[i];
                continue;
            }

            Eigen::MatrixXd H(rows, 2);
            Eigen::VectorXd r(rows);
            int row = 0;
            for (int b = 0; b < B; ++b) {
                if (b == ref)
                    continue;
                r(row) = ue.tdoa.values_m[row] - (d[b] - d[ref]);
                H(row, 0) = (theta[i].x - ue.anchors.positions[b].x) / d[b] -
                            (theta[i].x - ue.anchors.positions[ref].x) / d[ref];
                H(row, 1) = (theta[i].y - ue.anchors.positions[b].y) / d[b] -
                            (theta[i].y - ue.anchors.positions[ref].y) / d[ref];
                out[i].ops.scalar_madds += 4;
                ++row;
            }
            bool coop_degenerate = false;
            for (int s = 0; s < S; ++s) {
                const auto &nb = ue.neighbors[s];
                const Position pu = theta[nb.ue];
                const double du = distance(theta[i], pu);
                out[i].ops.scalar_madds += 3;
                if (du == 0.0) {
                    coop_degenerate = true;
                    break;
                }
                r(row) = nb.range_m - du;
                H(row, 0) = (theta[i].x - pu.x) / du;
                H(row, 1) = (theta[i].y - pu.y) / du;
                out[i].ops.scalar_madds += 2;
                ++row;
            }
            if (coop_degenerate) {
                out[i].failed = true;
                out[i].failure = "degenerate cooperative geometry";
                done[i] = true;
                theta_next[i] = theta[i];
                continue;
            }

            // block weights: C1^-1 on TDOA rows, 1/var on TW-TOA rows
            Eigen::MatrixXd Wr = Eigen::MatrixXd::Zero(rows, rows);
            Wr.topLeftCorner(B - 1, B - 1) = W[i];
            for (int s = 0; s < S; ++s)
                Wr(B - 1 + s, B - 1 + s) = 1.0 / ue.neighbors[s].variance_m2;

            const Eigen::MatrixXd HtW = H.transpose() * Wr;
            out[i].ops.scalar_madds += 2 * rows * rows;
            Eigen::Matrix2d N = HtW * H;
            out[i].ops.scalar_madds += 4 * rows;
            if (cfg.regularization > 0.0)
                N += cfg.regularization * Eigen::Matrix2d::Identity();
            else if (cond2x2(N) > 1e12) {
                out[i].failed = true;
                out[i].failure = "ill-conditioned normal matrix";
                done[i] = true;
                theta_next[i] = theta[i];
                continue;
            }

            const Eigen::Matrix2d Ninv = N.inverse();
            out[i].ops.matrix_inversions += 1;
            const Eigen::Vector2d step = Ninv * (HtW * r);
            out[i].ops.scalar_madds += 2 * rows + 4;
            theta_next[i] = {theta[i].x + step(0), theta[i].y + step(1)};
            out[i].estimate = theta_next[i];

            const double rk = r.dot(Wr * r) / rows;
            out[i].ops.scalar_madds += rows * rows + rows + 1;
            out[i].residual_trace.push_back(rk);
            out[i].iterations = k;

            if (!have_r[i]) {
                have_r[i] = true;
                r_prev[i] = rk;
                continue;
            }
            if (std::abs(rk - r_prev[i]) < cfg.epsilon) {
                if (++hits[i] >= cfg.consecutive_hits) {
                    out[i].converged = true;
                    done[i] = true;
                }
            } else {
                hits[i] = 0;
            }
            r_prev[i] = rk;
        }
        theta = theta_next;
        if (all_done)
            break;
    }
    return out;
}

} // namespace locsim
