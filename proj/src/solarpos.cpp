#include "sundial/solarpos.hpp"

#include <array>
#include <cmath>
#include <cstdio>

namespace sundial {

Vec3 sun_dir_from_angles(const SunAngles& a) {
    double az = deg2rad(a.azimuth_deg);
    double el = deg2rad(a.elevation_deg);
    return {std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el)};
}

SunAngles angles_from_sun_dir(const Vec3& d) {
    SunAngles a;
    a.elevation_deg = rad2deg(std::asin(std::clamp(d.z, -1.0, 1.0)));
    a.azimuth_deg = rad2deg(std::atan2(d.x, d.y));
    if (a.azimuth_deg < 0.0) a.azimuth_deg += 360.0;
    return a;
}

namespace {

double wrap360(double deg) {
    deg = std::fmod(deg, 360.0);
    return deg < 0.0 ? deg + 360.0 : deg;
}

}  // namespace

SunAngles sun_position(double unix_utc, double latitude_deg, double longitude_deg) {
    // Julian centuries from J2000.
    double jd = unix_utc / 86400.0 + 2440587.5;
    double t = (jd - 2451545.0) / 36525.0;
    if (t < -0.51 || t > 0.51)  // roughly 1949..2051
        throw TimeOutOfRange("sun_position supports years 1950..2050");

    double l0 = wrap360(280.46646 + t * (36000.76983 + t * 0.0003032));
    double m = 357.52911 + t * (35999.05029 - t * 0.0001537);
    double ecc = 0.016708634 - t * (0.000042037 + t * 0.0000001267);
    double mr = deg2rad(m);
    double center = (1.914602 - t * (0.004817 + t * 0.000014)) * std::sin(mr) +
                    (0.019993 - t * 0.000101) * std::sin(2.0 * mr) + 0.000289 * std::sin(3.0 * mr);
    double true_long = l0 + center;
    double omega = deg2rad(125.04 - 1934.136 * t);
    double lambda = deg2rad(true_long - 0.00569 - 0.00478 * std::sin(omega));
    double eps0 =
        23.0 + (26.0 + (21.448 - t * (46.8150 + t * (0.00059 - t * 0.001813))) / 60.0) / 60.0;
    double eps = deg2rad(eps0 + 0.00256 * std::cos(omega));

    double declination = std::asin(std::sin(eps) * std::sin(lambda));

    // Equation of time (minutes).
    double y = std::tan(eps / 2.0);
    y *= y;
    double l0r = deg2rad(l0);
    double eot = 4.0 * rad2deg(y * std::sin(2.0 * l0r) - 2.0 * ecc * std::sin(mr) +
                               4.0 * ecc * y * std::sin(mr) * std::cos(2.0 * l0r) -
                               0.5 * y * y * std::sin(4.0 * l0r) -
                               1.25 * ecc * ecc * std::sin(2.0 * mr));

    double utc_minutes = std::fmod(unix_utc, 86400.0) / 60.0;
    if (utc_minutes < 0.0) utc_minutes += 1440.0;
    double tst = utc_minutes + eot + 4.0 * longitude_deg;  // true solar time, minutes
    double hour_angle = tst / 4.0 - 180.0;                 // degrees, 0 at solar noon
    hour_angle = std::fmod(hour_angle + 540.0, 360.0) - 180.0;

    double lat = deg2rad(latitude_deg);
    double ha = deg2rad(hour_angle);
    double sin_el =
        std::sin(lat) * std::sin(declination) + std::cos(lat) * std::cos(declination) * std::cos(ha);
    sin_el = std::clamp(sin_el, -1.0, 1.0);
    double el = std::asin(sin_el);

    double cos_el = std::cos(el);
    SunAngles out;
    out.elevation_deg = rad2deg(el);
    if (cos_el < 1e-9) {
        out.azimuth_deg = 180.0;  // at the zenith azimuth is undefined
        return out;
    }
    double cos_az =
        (std::sin(declination) - sin_el * std::sin(lat)) / (cos_el * std::cos(lat));
    cos_az = std::clamp(cos_az, -1.0, 1.0);
    double az = rad2deg(std::acos(cos_az));  // [0,180], east of north
    out.azimuth_deg = hour_angle > 0.0 ? 360.0 - az : az;
    return out;
}

int64_t parse_iso8601(const std::string& s) {
    int y, mo, d, h, mi, sec;
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%dZ", &y, &mo, &d, &h, &mi, &sec) != 6)
        throw std::invalid_argument("bad ISO-8601 timestamp: " + s);
    // days-from-civil (Howard Hinnant's algorithm)
    int32_t yy = y - (mo <= 2);
    int32_t era = (yy >= 0 ? yy : yy - 399) / 400;
    uint32_t yoe = static_cast<uint32_t>(yy - era * 400);
    uint32_t doy = (153u * (mo + (mo > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    uint32_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    int64_t days = static_cast<int64_t>(era) * 146097 + static_cast<int64_t>(doe) - 719468;
    return days * 86400 + h * 3600 + mi * 60 + sec;
}

std::string format_iso8601(int64_t unix_utc) {
    int64_t days = unix_utc / 86400;
    int64_t rem = unix_utc % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    // civil-from-days
    days += 719468;
    int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    uint32_t doe = static_cast<uint32_t>(days - era * 146097);
    uint32_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t y = static_cast<int64_t>(yoe) + era * 400;
    uint32_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    uint32_t mp = (5 * doy + 2) / 153;
    uint32_t d = doy - (153 * mp + 2) / 5 + 1;
    uint32_t m = mp + (mp < 10 ? 3 : -9);
    y += (m <= 2);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                  static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
    return buf;
}

TimeEstimate estimate_time(const Vec3& sun_dir, double latitude_deg, double longitude_deg,
                           int64_t date_hint) {
    int64_t day_start = (date_hint / 86400) * 86400;
    if (date_hint < 0 && date_hint % 86400 != 0) day_start -= 86400;

    auto err_at = [&](double t) {
        SunAngles a = sun_position(t, latitude_deg, longitude_deg);
        return angle_between_deg(sun_dir, sun_dir_from_angles(a));
    };

    // Minute-level scan to bracket the global minimum.
    double best_t = day_start;
    double best_e = 1e9;
    bool any_daylight = false;
    for (int minute = 0; minute < 1440; ++minute) {
        double t = day_start + minute * 60.0;
        SunAngles a = sun_position(t, latitude_deg, longitude_deg);
        if (a.elevation_deg > 0.0) any_daylight = true;
        double e = angle_between_deg(sun_dir, sun_dir_from_angles(a));
        if (e < best_e) {
            best_e = e;
            best_t = t;
        }
    }
    if (!any_daylight)
        throw NoDaylightSolution("sun never rises at this location on the given date");

    // Golden-section refinement in the bracketing interval.
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = best_t - 90.0, hi = best_t + 90.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = err_at(x1), f2 = err_at(x2);
    while (hi - lo > 0.5) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = err_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = err_at(x2);
        }
    }
    TimeEstimate out;
    out.unix_utc = 0.5 * (lo + hi);
    out.residual_deg = err_at(out.unix_utc);
    return out;
}

LocationEstimate estimate_location(const std::vector<Vec3>& sun_dirs,
                                   const std::vector<int64_t>& timestamps) {
    if (sun_dirs.size() != timestamps.size() || sun_dirs.size() < 2)
        throw DegenerateGeometry("need at least two (direction, timestamp) pairs");
    bool distinct = false;
    for (size_t i = 1; i < timestamps.size(); ++i)
        if (timestamps[i] != timestamps[0]) distinct = true;
    if (!distinct) throw DegenerateGeometry("all timestamps identical");

    auto objective = [&](double lat, double lon) {
        if (lat < -89.9 || lat > 89.9) return 1e9;
        double s = 0.0;
        for (size_t i = 0; i < sun_dirs.size(); ++i) {
            SunAngles a = sun_position(static_cast<double>(timestamps[i]), lat, lon);
            s += angle_between_deg(sun_dirs[i], sun_dir_from_angles(a));
        }
        return s / static_cast<double>(sun_dirs.size());
    };

    double best = 1e18, best_lat = 0.0, best_lon = 0.0;
    for (int lat = -89; lat <= 89; ++lat) {
        for (int lon = -180; lon < 180; ++lon) {
            double v = objective(lat, lon);
            if (v < best) {
                best = v;
                best_lat = lat;
                best_lon = lon;
            }
        }
    }

    // Nelder-Mead refinement to 0.01 degree scale.
    struct Pt {
        double lat, lon, f;
    };
    std::array<Pt, 3> s{Pt{best_lat, best_lon, best},
                        Pt{best_lat + 1.0, best_lon, objective(best_lat + 1.0, best_lon)},
                        Pt{best_lat, best_lon + 1.0, objective(best_lat, best_lon + 1.0)}};
    auto order = [&] {
        std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.f < b.f; });
    };
    order();
    for (int it = 0; it < 300; ++it) {
        double diam = std::max({std::abs(s[0].lat - s[2].lat), std::abs(s[0].lon - s[2].lon),
                                std::abs(s[1].lat - s[2].lat), std::abs(s[1].lon - s[2].lon)});
        if (diam < 0.005) break;
        double clat = (s[0].lat + s[1].lat) / 2.0, clon = (s[0].lon + s[1].lon) / 2.0;
        Pt refl{clat + (clat - s[2].lat), clon + (clon - s[2].lon), 0.0};
        refl.f = objective(refl.lat, refl.lon);
        if (refl.f < s[0].f) {
            Pt exp_{clat + 2.0 * (clat - s[2].lat), clon + 2.0 * (clon - s[2].lon), 0.0};
            exp_.f = objective(exp_.lat, exp_.lon);
            s[2] = exp_.f < refl.f ? exp_ : refl;
        } else if (refl.f < s[1].f) {
            s[2] = refl;
        } else {
            Pt con{clat + 0.5 * (s[2].lat - clat), clon + 0.5 * (s[2].lon - clon), 0.0};
            con.f = objective(con.lat, con.lon);
            if (con.f < s[2].f) {
                s[2] = con;
            } else {
                for (int i = 1; i < 3; ++i) {
                    s[i].lat = s[0].lat + 0.5 * (s[i].lat - s[0].lat);
                    s[i].lon = s[0].lon + 0.5 * (s[i].lon - s[0].lon);
                    s[i].f = objective(s[i].lat, s[i].lon);
                }
            }
        }
        order();
    }

    LocationEstimate out;
    out.latitude_deg = s[0].lat;
    out.longitude_deg = s[0].lon;
    out.residual_deg = s[0].f;
    return out;
}

double haversine_miles(double lat1, double lon1, double lat2, double lon2) {
    constexpr double kEarthRadiusMiles = 3958.7613;
    double p1 = deg2rad(lat1), p2 = deg2rad(lat2);
    double dp = deg2rad(lat2 - lat1), dl = deg2rad(lon2 - lon1);
    double a = std::sin(dp / 2.0) * std::sin(dp / 2.0) +
               std::cos(p1) * std::cos(p2) * std::sin(dl / 2.0) * std::sin(dl / 2.0);
    return 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(std::min(1.0, a)));
}

}  // namespace sundial
