#include "sundial/camera.hpp"

namespace sundial {

Ray ray_for_pixel(const OrthoCamera& cam, int i, int j, double jitter_x, double jitter_y) {
    if (i < 0 || i >= cam.width || j < 0 || j >= cam.height)
        throw PixelOutOfRange("pixel (" + std::to_string(i) + "," + std::to_string(j) +
                              ") outside " + std::to_string(cam.width) + "x" +
                              std::to_string(cam.height));
    double u = (i + jitter_x - 0.5 * cam.width) * cam.pixel_pitch;
    double v = (j + jitter_y - 0.5 * cam.height) * cam.pixel_pitch;
    return {cam.center + u * cam.right + v * cam.up, cam.view_dir};
}

OrthoCamera make_ortho_camera(const Vec3& target, double off_nadir_deg, double azimuth_deg,
                              double plane_height, double pixel_pitch, int width, int height) {
    double theta = deg2rad(off_nadir_deg);
    double phi = deg2rad(azimuth_deg);
    // Azimuth clockwise from north (+y): horizontal direction (sin phi, cos phi).
    double sx = std::sin(phi), sy = std::cos(phi);
    Vec3 d{std::sin(theta) * sx, std::sin(theta) * sy, -std::cos(theta)};
    Vec3 right{-sy, sx, 0.0};                // horizontal, perpendicular to d
    Vec3 up = cross(d, right);               // completes the right-handed frame
    OrthoCamera cam;
    cam.view_dir = d;
    cam.right = right;
    cam.up = up;
    // Place the plane so the central ray passes through `target`.
    double back = plane_height / std::cos(theta);
    cam.center = target - d * back;
    cam.pixel_pitch = pixel_pitch;
    cam.width = width;
    cam.height = height;
    return cam;
}

}  // namespace sundial
