// Small 3-vector math used throughout. Double precision; field storage is f32.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace sundial {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    double& operator[](int i) { return (&x)[i]; }
    double operator[](int i) const { return (&x)[i]; }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    // Elementwise product (the rendering equation's color products).
    Vec3 cwise(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) { return v / norm(v); }

// Normalize with a degenerate fallback of +z; reports whether the input was usable.
inline Vec3 normalized_or_up(const Vec3& v, bool* degenerate = nullptr, double eps = 1e-8) {
    double n = norm(v);
    if (n < eps) {
        if (degenerate) *degenerate = true;
        return {0.0, 0.0, 1.0};
    }
    if (degenerate) *degenerate = false;
    return v / n;
}

struct Ray {
    Vec3 o;  // origin
    Vec3 d;  // unit direction
};

struct Aabb {
    Vec3 lo, hi;

    Vec3 extent() const { return hi - lo; }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z &&
               p.z <= hi.z;
    }
};

// Slab intersection. Returns false on a miss; otherwise [t_enter, t_exit] with
// t_exit >= t_enter, clipped to t >= t_min.
inline bool intersect_aabb(const Ray& r, const Aabb& b, double t_min, double* t_enter,
                           double* t_exit) {
    double t0 = t_min;
    double t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        double inv = 1.0 / r.d[a];
        double tn = (b.lo[a] - r.o[a]) * inv;
        double tf = (b.hi[a] - r.o[a]) * inv;
        if (inv < 0.0) std::swap(tn, tf);
        t0 = std::max(t0, tn);
        t1 = std::min(t1, tf);
        if (t0 > t1) return false;
    }
    *t_enter = t0;
    *t_exit = t1;
    return true;
}

// Exit distance along d from a point assumed inside the box, plus the axis and
// sign of the face crossed. Needed by the shadow-ray gradient chain.
struct AabbExit {
    double t = 0.0;
    int axis = 2;
    double face = 0.0;  // coordinate of the exit plane on `axis`
};

inline AabbExit aabb_exit(const Vec3& o, const Vec3& d, const Aabb& b) {
    AabbExit e;
    e.t = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) continue;
        double plane = d[a] > 0.0 ? b.hi[a] : b.lo[a];
        double t = (plane - o[a]) / d[a];
        if (t < e.t) {
            e.t = t;
            e.axis = a;
            e.face = plane;
        }
    }
    if (e.t < 0.0) e.t = 0.0;
    return e;
}

inline double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

inline double angle_between_deg(const Vec3& a, const Vec3& b) {
    return std::acos(std::clamp(dot(a, b), -1.0, 1.0)) * (180.0 / M_PI);
}

inline double deg2rad(double d) { return d * (M_PI / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / M_PI); }

}  // namespace sundial
