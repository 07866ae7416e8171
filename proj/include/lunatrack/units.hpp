#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace lunatrack {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s

constexpr double deg_to_rad(double deg) { return deg * (std::numbers::pi / 180.0); }
constexpr double rad_to_deg(double rad) { return rad * (180.0 / std::numbers::pi); }

/// Time of frame tick `k`, rounded to the microsecond so logged timestamps
/// print cleanly and compare exactly across runs.
inline double tick_time(std::uint64_t k, double period_s) {
    return std::round(static_cast<double>(k) * period_s * 1e6) / 1e6;
}

}  // namespace lunatrack
