// Procedural cuboid-city scenes with analytically known albedo, depth,
// shadows, and sun-dependent soft shading. The exact forward oracle behind
// every synthetic experiment.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sundial/camera.hpp"
#include "sundial/image_io.hpp"
#include "sundial/vec.hpp"

namespace sundial {

struct SynthBox {
    Vec3 lo, hi;
    // face order: x-, x+, y-, y+, z- (bottom), z+ (roof)
    Vec3 face_albedo[6];
    bool transient = false;
};

// Soft occluder: casts a Gaussian-profile soft shadow along the sun ray
// through its center; invisible to primary rays.
struct VegBlob {
    Vec3 center;
    double radius = 5.0;     // Gaussian width, meters
    double amplitude = 0.4;  // peak attenuation in [0.2, 0.6]
};

struct SynthCapture {
    OrthoCamera camera;
    double sun_azimuth_deg = 0.0;
    double sun_elevation_deg = 45.0;
    int64_t timestamp = 0;
};

struct SynthScene {
    Aabb bbox;             // model domain (scene plus margin)
    double ground_z = 0.0;
    double extent = 200.0;  // imaged square side, meters
    Vec3 ground_albedo_a{0.45, 0.43, 0.38};
    Vec3 ground_albedo_b{0.32, 0.30, 0.27};
    double checker_period = 25.0;
    std::vector<SynthBox> boxes;
    std::vector<VegBlob> blobs;
    Vec3 ambient_true{0.08, 0.09, 0.22};
    double latitude = 30.349, longitude = -81.664;
    std::vector<SynthCapture> captures;
    uint64_t seed = 0;

    bool transient_enabled = false;
    int transient_box = -1;  // index into boxes, or -1

    // Transient boxes exist only in the first half of the captures.
    bool box_active(int box_idx, int capture_idx) const {
        if (!boxes[box_idx].transient) return true;
        return capture_idx >= 0 && capture_idx < static_cast<int>(captures.size()) / 2;
    }
};

struct BlocktownParams {
    int n_images = 12;
    int width = 128, height = 128;
    double extent = 200.0;
    double margin = 20.0;
    int boxes_min = 8, boxes_max = 15;
    int blobs_min = 2, blobs_max = 4;
    double elev_min = 25.0, elev_max = 65.0;
    double offnadir_max = 15.0;
    double latitude = 30.349, longitude = -81.664;
    int year = 2015;
    bool transient = false;
};

SynthScene make_blocktown(const BlocktownParams& p, uint64_t seed);

struct SceneHit {
    bool hit = false;
    double t = 0.0;
    Vec3 point;
    Vec3 albedo;
};

// Analytic first hit against the ground plane and active boxes.
SceneHit first_hit(const SynthScene& scene, const Ray& ray, int capture_idx);

// Exact hard-shadow test from a surface point toward the sun (boxes only).
bool point_in_shadow(const SynthScene& scene, const Vec3& point, const Vec3& sun_dir,
                     int capture_idx);

// Product of per-blob soft-shadow factors at a surface point.
double soft_shadow_factor(const SynthScene& scene, const Vec3& point, const Vec3& sun_dir);

// Per-pixel hard-shadow mask (1 = in shadow) from first-hit points, center
// subsample. `capture_idx` selects the active box set (-1 = all permanent).
Image oracle_shadow_mask(const SynthScene& scene, const OrthoCamera& cam, const Vec3& sun_dir,
                         int capture_idx);

struct GroundTruth {
    Image image;     // 3ch: albedo / albedo*ambient / albedo*soft
    Image depth;     // 1ch: ray distance to first hit, meters
    Image albedo;    // 3ch: supersampled albedo
    Image shadow;    // 1ch: hard shadow mask (center sample)
    Image softmask;  // 1ch: 1 - soft factor (center sample)
};

GroundTruth render_ground_truth(const SynthScene& scene, const OrthoCamera& cam,
                                const Vec3& sun_dir, int capture_idx, int supersample = 3);

// Writes images/, gt/, meta/, manifest.json with the chronological 75/25 split.
void make_dataset(const SynthScene& scene, const std::string& out_dir, int supersample = 3);

uint64_t scene_hash(const SynthScene& scene);

}  // namespace sundial
