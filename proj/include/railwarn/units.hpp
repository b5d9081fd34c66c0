#pragma once

namespace railwarn {

inline constexpr double kMphToMps = 0.44704;
inline constexpr double kSpeedOfLight = 299792458.0;

constexpr double mph_to_mps(double mph) { return mph * kMphToMps; }
constexpr double mps_to_mph(double mps) { return mps / kMphToMps; }

}  // namespace railwarn
