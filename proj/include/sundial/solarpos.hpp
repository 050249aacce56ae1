// Solar ephemeris (NOAA-style low-precision, ~0.1-0.2 deg) and its inversion:
// capture-time and capture-location estimation from sun directions.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sundial/vec.hpp"

namespace sundial {

struct TimeOutOfRange : std::out_of_range {
    explicit TimeOutOfRange(const std::string& what) : std::out_of_range(what) {}
};
struct NoDaylightSolution : std::runtime_error {
    explicit NoDaylightSolution(const std::string& what) : std::runtime_error(what) {}
};
struct DegenerateGeometry : std::runtime_error {
    explicit DegenerateGeometry(const std::string& what) : std::runtime_error(what) {}
};

// Azimuth degrees clockwise from north, elevation degrees above the horizon.
struct SunAngles {
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
};

// Scene convention: +x east, +y north, +z up.
Vec3 sun_dir_from_angles(const SunAngles& a);
SunAngles angles_from_sun_dir(const Vec3& d);

// UTC unix seconds (fractional) -> sun angles. Years 1950..2050.
SunAngles sun_position(double unix_utc, double latitude_deg, double longitude_deg);

// ISO-8601 "YYYY-MM-DDTHH:MM:SSZ" (UTC only).
int64_t parse_iso8601(const std::string& s);
std::string format_iso8601(int64_t unix_utc);

struct TimeEstimate {
    double unix_utc = 0.0;       // best time on the reference date
    double residual_deg = 0.0;   // angular error at the minimizer
};

// Recovers the time of day (on the UTC date containing `date_hint`) whose sun
// direction best matches `sun_dir`: minute-level scan plus golden-section
// refinement to sub-second resolution.
TimeEstimate estimate_time(const Vec3& sun_dir, double latitude_deg, double longitude_deg,
                           int64_t date_hint);

struct LocationEstimate {
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double residual_deg = 0.0;  // mean angular error at the minimizer
};

// Recovers the capture location from >= 2 (sun direction, timestamp) pairs
// with distinct timestamps: 1 degree grid search then simplex refinement.
LocationEstimate estimate_location(const std::vector<Vec3>& sun_dirs,
                                   const std::vector<int64_t>& timestamps);

double haversine_miles(double lat1, double lon1, double lat2, double lon2);

}  // namespace sundial
