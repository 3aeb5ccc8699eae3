#pragma once

#include "locsim/errors.hpp"

#include <Eigen/Dense>

#include <string_view>
#include <vector>

namespace locsim {

struct Position {
    double x = 0.0;
    double y = 0.0;
};

inline Position operator+(Position a, Position b) { return {a.x + b.x, a.y + b.y}; }
inline Position operator-(Position a, Position b) { return {a.x - b.x, a.y - b.y}; }

double distance(Position a, Position b);

/// Known anchor positions plus the index of the TDOA reference anchor.
/// Invariants (validated on construction): >= 2 pairwise distinct anchors,
/// reference index in range.
struct AnchorSet {
    std::vector<Position> positions;
    int reference_index = 0;

    AnchorSet(std::vector<Position> pos, int ref);
    int size() const { return static_cast<int>(positions.size()); }
};

/// Jacobian of the TDOA vector w.r.t. position: (B-1) x 2, rows ordered by
/// anchor index with the reference row removed.
Eigen::MatrixXd jacobian_tdoa(const AnchorSet &anchors, Position theta);

/// Jacobian of the range vector w.r.t. position: B x 2, row b is the unit
/// vector from anchor b toward theta.
Eigen::MatrixXd jacobian_toa(const AnchorSet &anchors, Position theta);

/// [jacobian_toa | ones]: B x 3, the range-plus-common-offset model.
Eigen::MatrixXd jacobian_augmented(const AnchorSet &anchors, Position theta);

struct DopReport {
    double gdop = 0.0;
    double hdop = 0.0;
    std::vector<double> per_axis;
};

/// Dilution of precision of an arbitrary measurement Jacobian:
/// gdop = sqrt(trace((H^T H)^-1)), per-axis entries from the diagonal.
DopReport dop(const Eigen::MatrixXd &jacobian);

enum class DopRating { excellent, good, fair, poor };

/// Rating bands: (0,2] excellent, (2,5] good, (5,10] fair, >10 poor.
DopRating dop_rating(double gdop);
std::string_view dop_rating_name(DopRating r);

} // namespace locsim
