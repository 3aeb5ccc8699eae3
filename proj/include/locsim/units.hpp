#pragma once

#include <cmath>

namespace locsim {

/// Speed of light [m/s].
inline constexpr double kSpeedOfLight = 299792458.0;

// All dB/linear conversions live here so the convention cannot drift
// between modules.

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }

inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

} // namespace locsim
