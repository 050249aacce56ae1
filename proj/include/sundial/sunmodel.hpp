// Per-image sun-direction refinement through the up-vector rotation
// parametrization, plus angular error metrics.
#pragma once

#include <array>

#include "sundial/field.hpp"
#include "sundial/vec.hpp"

namespace sundial {

using Mat3 = std::array<double, 9>;  // row-major

inline Vec3 mat3_mul(const Mat3& m, const Vec3& v) {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

// Rotation taking unit `u` to unit `u_i`: R = I + V + V^2/(1+c) with
// V = skew(u x u_i), c = u . u_i. Antiparallel inputs fall back to a 180
// degree rotation about x.
Mat3 rotation_from_up(const Vec3& u, const Vec3& u_i);

// Caches needed to differentiate d_s = R(u, normalize(up_raw)) * d_s0.
struct SunRotation {
    Vec3 up_raw;       // as stored (float params widened)
    double raw_norm = 1.0;
    Vec3 u_i;          // normalized
    Mat3 rot;
    Vec3 d_s0;
    Vec3 d_s;
    bool antiparallel = false;
    bool raw_degenerate = false;
};

SunRotation refine_sun_direction(const PerImageParams& img, const Vec3& d_s0);

// Chain rule from d(loss)/d(d_s) back to the raw up parameters. Accumulates
// into grad3 (length 3). No gradient flows through the fallback branches.
void refine_sun_backward(const SunRotation& s, const Vec3& d_upstream, float* grad3);

// arccos of the clamped dot product, in degrees.
double angular_error_deg(const Vec3& a, const Vec3& b);

}  // namespace sundial
