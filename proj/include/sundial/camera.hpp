// Orthographic push-broom style camera: all rays parallel to view_dir,
// origins on a pixel lattice in the camera plane.
#pragma once

#include <stdexcept>

#include "sundial/vec.hpp"

namespace sundial {

struct PixelOutOfRange : std::out_of_range {
    explicit PixelOutOfRange(const std::string& what) : std::out_of_range(what) {}
};

struct OrthoCamera {
    Vec3 view_dir;  // unit, z < 0 (looking down)
    Vec3 right;     // unit
    Vec3 up;        // unit; {right, up, view_dir} right-handed orthonormal
    Vec3 center;    // center of the camera plane, above the scene bbox
    double pixel_pitch = 1.0;  // meters per pixel
    int width = 0, height = 0;
};

// Ray through pixel (i, j) at subpixel offset `jitter` in [0,1)^2.
Ray ray_for_pixel(const OrthoCamera& cam, int i, int j, double jitter_x = 0.5,
                  double jitter_y = 0.5);

// Camera looking at `target` from off-nadir angle (degrees) toward azimuth
// (degrees clockwise from +y/north), plane placed `plane_height` above target.
OrthoCamera make_ortho_camera(const Vec3& target, double off_nadir_deg, double azimuth_deg,
                              double plane_height, double pixel_pitch, int width, int height);

}  // namespace sundial
