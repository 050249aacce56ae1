#include "sundial/sunmodel.hpp"

namespace sundial {

namespace {

Mat3 skew(const Vec3& v) {
    return {0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0};
}

}  // namespace

Mat3 rotation_from_up(const Vec3& u, const Vec3& u_i) {
    double c = dot(u, u_i);
    if (c <= -1.0 + 1e-6) {
        // Antiparallel: documented deterministic fallback, 180 deg about x.
        return {1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0};
    }
    Vec3 v = cross(u, u_i);
    Mat3 V = skew(v);
    Mat3 R{1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};
    double inv = 1.0 / (1.0 + c);
    // R = I + V + V^2 / (1 + c); V^2 computed inline.
    for (int r = 0; r < 3; ++r) {
        for (int col = 0; col < 3; ++col) {
            double v2 = 0.0;
            for (int k = 0; k < 3; ++k) v2 += V[3 * r + k] * V[3 * k + col];
            R[3 * r + col] += V[3 * r + col] + v2 * inv;
        }
    }
    return R;
}

SunRotation refine_sun_direction(const PerImageParams& img, const Vec3& d_s0) {
    SunRotation s;
    s.up_raw = {img.up_raw[0], img.up_raw[1], img.up_raw[2]};
    s.d_s0 = d_s0;
    s.raw_norm = norm(s.up_raw);
    if (s.raw_norm < 1e-8) {
        s.raw_degenerate = true;
        s.u_i = {0.0, 0.0, 1.0};
    } else {
        s.u_i = s.up_raw / s.raw_norm;
    }
    const Vec3 u{0.0, 0.0, 1.0};
    s.antiparallel = dot(u, s.u_i) <= -1.0 + 1e-6;
    s.rot = rotation_from_up(u, s.u_i);
    s.d_s = mat3_mul(s.rot, d_s0);
    return s;
}

void refine_sun_backward(const SunRotation& s, const Vec3& d_upstream, float* grad3) {
    if (s.antiparallel || s.raw_degenerate) return;
    const Vec3 u{0.0, 0.0, 1.0};
    const Vec3 w = s.u_i;
    const double c = dot(u, w);
    const Vec3 v = cross(u, w);
    const double inv = 1.0 / (1.0 + c);

    // dL/dR_ij = d_upstream_i * d_s0_j
    // R = I + skew(v) + (v v^T - |v|^2 I) * inv    (skew(v)^2 = v v^T - |v|^2 I)
    // Assemble dL/dv and dL/dc.
    Vec3 gv;
    double gc = 0.0;
    const double v2 = dot(v, v);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double gR = d_upstream[i] * s.d_s0[j];
            if (gR == 0.0) continue;
            // skew term: dskew(v)_ij/dv_k
            // skew = [[0,-v3,v2],[v3,0,-v1],[-v2,v1,0]]
            static constexpr int skew_idx[9] = {-1, 2, 1, 2, -1, 0, 1, 0, -1};
            static constexpr double skew_sgn[9] = {0, -1, 1, 1, 0, -1, -1, 1, 0};
            int k = skew_idx[3 * i + j];
            if (k >= 0) gv[k] += gR * skew_sgn[3 * i + j];
            // (v v^T)_ij = v_i v_j -> d/dv_k = delta_ik v_j + v_i delta_jk
            gv[i] += gR * inv * v[j];
            gv[j] += gR * inv * v[i];
            // -|v|^2 delta_ij * inv -> d/dv_k = -2 v_k inv on the diagonal
            if (i == j) {
                gv.x += gR * inv * (-2.0 * v.x);
                gv.y += gR * inv * (-2.0 * v.y);
                gv.z += gR * inv * (-2.0 * v.z);
                // d/dc of (v_i v_j - |v|^2 delta_ij) inv: note d(inv)/dc = -inv^2
                gc += gR * (-(v[i] * v[j] - v2)) * inv * inv;
            } else {
                gc += gR * (-(v[i] * v[j])) * inv * inv;
            }
        }
    }
    // v = u x w -> dv = u x dw; so dL/dw += skew(u)^T gv = -u x gv.
    Vec3 gw = cross(gv, u);  // == -(u x gv)
    // c = u . w
    gw += gc * u;
    // w = raw/|raw| -> d raw = (gw - w (w . gw)) / |raw|
    Vec3 graw = (gw - w * dot(w, gw)) / s.raw_norm;
    grad3[0] += static_cast<float>(graw.x);
    grad3[1] += static_cast<float>(graw.y);
    grad3[2] += static_cast<float>(graw.z);
}

double angular_error_deg(const Vec3& a, const Vec3& b) {
    return angle_between_deg(a, b);
}

}  // namespace sundial
