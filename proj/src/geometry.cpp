#include "locsim/geometry.hpp"

#include <cmath>

namespace locsim {

double distance(Position a, Position b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

AnchorSet::AnchorSet(std::vector<Position> pos, int ref)
    : positions(std::move(pos)), reference_index(ref) {
    if (positions.size() < 2)
        throw InvalidInput("AnchorSet needs at least 2 anchors");
    if (ref < 0 || ref >= static_cast<int>(positions.size()))
        throw InvalidReference("reference_index out of range");
    for (std::size_t i = 0; i < positions.size(); ++i) {
        if (!std::isfinite(positions[i].x) || !std::isfinite(positions[i].y))
            throw InvalidInput("anchor coordinates must be finite");
        for (std::size_t j = i + 1; j < positions.size(); ++j)
            if (positions[i].x == positions[j].x &&
                positions[i].y == positions[j].y)
                throw InvalidInput("anchor positions must be pairwise distinct");
    }
}

namespace {

// Unit vectors from each anchor toward theta; throws on zero range.
std::vector<Eigen::Vector2d> unit_rows(const AnchorSet &anchors,
                                       Position theta) {
    std::vector<Eigen::Vector2d> rows;
    rows.reserve(anchors.positions.size());
    for (const auto &a : anchors.positions) {
        const double dx = theta.x - a.x;
        const double dy = theta.y - a.y;
        const double d = std::hypot(dx, dy);
        if (d <= 0.0)
            throw DegenerateGeometry("target coincides with an anchor");
        rows.emplace_back(dx / d, dy / d);
    }
    return rows;
}

} // namespace

Eigen::MatrixXd jacobian_tdoa(const AnchorSet &anchors, Position theta) {
    const auto rows = unit_rows(anchors, theta);
    const int B = anchors.size();
    Eigen::MatrixXd H(B - 1, 2);
    const Eigen::Vector2d uref = rows[anchors.reference_index];
    int r = 0;
    for (int b = 0; b < B; ++b) {
        if (b == anchors.reference_index)
            continue;
        H.row(r++) = (rows[b] - uref).transpose();
    }
    return H;
}

Eigen::MatrixXd jacobian_toa(const AnchorSet &anchors, Position theta) {
    const auto rows = unit_rows(anchors, theta);
    Eigen::MatrixXd H(anchors.size(), 2);
    for (int b = 0; b < anchors.size(); ++b)
        H.row(b) = rows[b].transpose();
    return H;
}

Eigen::MatrixXd jacobian_augmented(const AnchorSet &anchors, Position theta) {
    const Eigen::MatrixXd Ht = jacobian_toa(anchors, theta);
    Eigen::MatrixXd H(Ht.rows(), 3);
    H.leftCols<2>() = Ht;
    H.col(2).setOnes();
    return H;
}

DopReport dop(const Eigen::MatrixXd &jacobian) {
    const Eigen::MatrixXd M = jacobian.transpose() * jacobian;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto &sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e12)
        throw SingularGeometry("H^T H is numerically singular");
    const Eigen::MatrixXd Minv = M.inverse();
    DopReport rep;
    rep.per_axis.resize(Minv.rows());
    for (int i = 0; i < Minv.rows(); ++i)
        rep.per_axis[i] = std::sqrt(Minv(i, i));
    rep.gdop = std::sqrt(Minv.trace());
    rep.hdop = std::sqrt(Minv(0, 0) + Minv(1, 1));
    return rep;
}

DopRating dop_rating(double gdop) {
    if (!(gdop > 0.0))
        throw InvalidInput("gdop must be positive");
    if (gdop <= 2.0)
        return DopRating::excellent;
    if (gdop <= 5.0)
        return DopRating::good;
    if (gdop <= 10.0)
        return DopRating::fair;
    return DopRating::poor;
}

std::string_view dop_rating_name(DopRating r) {
    switch (r) {
    case DopRating::excellent:
        return "Excellent";
    case DopRating::good:
        return "Good";
    case DopRating::fair:
        return "Fair";
    }
    return "Poor";
}

} // namespace locsim
