#include "sundial/synthgen.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sundial/rng.hpp"
#include "sundial/solarpos.hpp"

namespace sundial {

namespace {

// Muted facade/roof palette, sampled per face group.
Vec3 sample_albedo(Rng& rng, double lo = 0.2, double hi = 0.8) {
    double base = rng.uniform(lo, hi);
    return {clamp01(base + rng.uniform(-0.08, 0.08)), clamp01(base + rng.uniform(-0.08, 0.08)),
            clamp01(base + rng.uniform(-0.08, 0.08))};
}

Vec3 ground_albedo(const SynthScene& s, const Vec3& p) {
    int cx = static_cast<int>(std::floor(p.x / s.checker_period));
    int cy = static_cast<int>(std::floor(p.y / s.checker_period));
    return ((cx + cy) & 1) ? s.ground_albedo_b : s.ground_albedo_a;
}

}  // namespace

SynthScene make_blocktown(const BlocktownParams& p, uint64_t seed) {
    SynthScene s;
    s.seed = seed;
    s.extent = p.extent;
    s.latitude = p.latitude;
    s.longitude = p.longitude;
    s.transient_enabled = p.transient;

    Rng rng(seed ^ 0x5317a9d1b2c4e6f8ull);

    double max_height = 0.0;
    int n_boxes = rng.uniform_int(p.boxes_min, p.boxes_max);
    for (int b = 0; b < n_boxes; ++b) {
        SynthBox box;
        double cx = rng.uniform(0.12 * p.extent, 0.88 * p.extent);
        double cy = rng.uniform(0.12 * p.extent, 0.88 * p.extent);
        double ex = rng.uniform(4.0, 12.0);
        double ey = rng.uniform(4.0, 12.0);
        double h = rng.uniform(5.0, 30.0);
        box.lo = {cx - ex, cy - ey, 0.0};
        box.hi = {cx + ex, cy + ey, h};
        Vec3 wall = sample_albedo(rng, 0.25, 0.7);
        Vec3 roof = sample_albedo(rng, 0.2, 0.8);
        for (int f = 0; f < 4; ++f) box.face_albedo[f] = wall;
        box.face_albedo[4] = wall;
        box.face_albedo[5] = roof;
        s.boxes.push_back(box);
        max_height = std::max(max_height, h);
    }
    if (p.transient && !s.boxes.empty()) {
        s.transient_box = static_cast<int>(rng.below(s.boxes.size()));
        s.boxes[s.transient_box].transient = true;
    }

    int n_blobs = rng.uniform_int(p.blobs_min, p.blobs_max);
    for (int b = 0; b < n_blobs; ++b) {
        VegBlob blob;
        blob.center = {rng.uniform(0.15 * p.extent, 0.85 * p.extent),
                       rng.uniform(0.15 * p.extent, 0.85 * p.extent), rng.uniform(3.0, 8.0)};
        blob.radius = rng.uniform(4.0, 9.0);
        blob.amplitude = rng.uniform(0.2, 0.6);
        s.blobs.push_back(blob);
    }

    double m = p.margin;
    s.bbox = {{-m, -m, -2.0}, {p.extent + m, p.extent + m, std::max(max_height + 8.0, 34.0)}};

    // Captures: random daylight instants in the given year, elevation-banded,
    // chronological. Sun angles come from the ephemeris so inversion is exact.
    char ts[64];
    std::vector<int64_t> times;
    while (static_cast<int>(times.size()) < p.n_images) {
        int month = rng.uniform_int(3, 10);
        int day = rng.uniform_int(1, 28);
        int hour = rng.uniform_int(12, 22);
        int minute = rng.uniform_int(0, 59);
        int sec = rng.uniform_int(0, 59);
        std::snprintf(ts, sizeof(ts), "%04d-%02d-%02dT%02d:%02d:%02dZ", p.year, month, day, hour,
                      minute, sec);
        int64_t t = parse_iso8601(ts);
        SunAngles a = sun_position(static_cast<double>(t), s.latitude, s.longitude);
        if (a.elevation_deg < p.elev_min || a.elevation_deg > p.elev_max) continue;
        if (std::find(times.begin(), times.end(), t) != times.end()) continue;
        times.push_back(t);
    }
    std::sort(times.begin(), times.end());

    Vec3 target{p.extent / 2.0, p.extent / 2.0, 0.0};
    double pitch = p.extent / p.width;
    for (int i = 0; i < p.n_images; ++i) {
        SynthCapture cap;
        cap.timestamp = times[i];
        SunAngles a = sun_position(static_cast<double>(times[i]), s.latitude, s.longitude);
        cap.sun_azimuth_deg = a.azimuth_deg;
        cap.sun_elevation_deg = a.elevation_deg;
        double off_nadir = (i == 0) ? 0.0 : rng.uniform(3.0, p.offnadir_max);
        double cam_azimuth = rng.uniform(0.0, 360.0);
        // Plane high enough that tilted-plane corners stay above the bbox top.
        double corner_drop =
            0.55 * std::max(p.width, p.height) * pitch * std::sin(deg2rad(off_nadir));
        double plane_h = s.bbox.hi.z + corner_drop + 12.0;
        cap.camera = make_ortho_camera(target, off_nadir, cam_azimuth, plane_h, pitch, p.width,
                                       p.height);
        s.captures.push_back(cap);
    }
    return s;
}

SceneHit first_hit(const SynthScene& scene, const Ray& ray, int capture_idx) {
    SceneHit best;
    // ground plane
    if (ray.d.z < 0.0) {
        double t = (scene.ground_z - ray.o.z) / ray.d.z;
        if (t > 0.0) {
            Vec3 p = ray.o + t * ray.d;
            if (p.x >= scene.bbox.lo.x && p.x <= scene.bbox.hi.x && p.y >= scene.bbox.lo.y &&
                p.y <= scene.bbox.hi.y) {
                best.hit = true;
                best.t = t;
                best.point = p;
                best.albedo = ground_albedo(scene, p);
            }
        }
    }
    for (size_t b = 0; b < scene.boxes.size(); ++b) {
        if (!scene.box_active(static_cast<int>(b), capture_idx)) continue;
        const SynthBox& box = scene.boxes[b];
        double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
        int enter_axis = -1;
        for (int a = 0; a < 3; ++a) {
            double inv = 1.0 / ray.d[a];
            double tn = (box.lo[a] - ray.o[a]) * inv;
            double tf = (box.hi[a] - ray.o[a]) * inv;
            if (inv < 0.0) std::swap(tn, tf);
            if (tn > t0) {
                t0 = tn;
                enter_axis = a;
            }
            t1 = std::min(t1, tf);
            if (t0 > t1) break;
        }
        if (t0 > t1 || enter_axis < 0) continue;
        if (best.hit && t0 >= best.t) continue;
        best.hit = true;
        best.t = t0;
        best.point = ray.o + t0 * ray.d;
        int face = 2 * enter_axis + (ray.d[enter_axis] > 0.0 ? 0 : 1);
        best.albedo = box.face_albedo[face];
    }
    return best;
}

bool point_in_shadow(const SynthScene& scene, const Vec3& point, const Vec3& sun_dir,
                     int capture_idx) {
    for (size_t b = 0; b < scene.boxes.size(); ++b) {
        if (!scene.box_active(static_cast<int>(b), capture_idx)) continue;
        const SynthBox& box = scene.boxes[b];
        double t0 = 1e-6, t1 = std::numeric_limits<double>::infinity();
        bool miss = false;
        for (int a = 0; a < 3; ++a) {
            double inv = 1.0 / sun_dir[a];
            double tn = (box.lo[a] - point[a]) * inv;
            double tf = (box.hi[a] - point[a]) * inv;
            if (inv < 0.0) std::swap(tn, tf);
            t0 = std::max(t0, tn);
            t1 = std::min(t1, tf);
            if (t0 > t1) {
                miss = true;
                break;
            }
        }
        if (!miss) return true;
    }
    return false;
}

double soft_shadow_factor(const SynthScene& scene, const Vec3& point, const Vec3& sun_dir) {
    double factor = 1.0;
    for (const VegBlob& blob : scene.blobs) {
        Vec3 rel = blob.center - point;
        double along = dot(rel, sun_dir);
        if (along <= 0.0) continue;  // blob not between the point and the sun
        Vec3 perp = rel - along * sun_dir;
        double d2 = dot(perp, perp);
        factor *= 1.0 - blob.amplitude * std::exp(-d2 / (blob.radius * blob.radius));
    }
    return factor;
}

Image oracle_shadow_mask(const SynthScene& scene, const OrthoCamera& cam, const Vec3& sun_dir,
                         int capture_idx) {
    Image mask(cam.width, cam.height, 1);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            SceneHit h = first_hit(scene, ray_for_pixel(cam, x, y), capture_idx);
            if (h.hit && point_in_shadow(scene, h.point, sun_dir, capture_idx))
                mask.at(x, y) = 1.0f;
        }
    }
    return mask;
}

GroundTruth render_ground_truth(const SynthScene& scene, const OrthoCamera& cam,
                                const Vec3& sun_dir, int capture_idx, int supersample) {
    GroundTruth gt;
    gt.image = Image(cam.width, cam.height, 3);
    gt.depth = Image(cam.width, cam.height, 1);
    gt.albedo = Image(cam.width, cam.height, 3);
    gt.shadow = Image(cam.width, cam.height, 1);
    gt.softmask = Image(cam.width, cam.height, 1);

    const int ss = std::max(1, supersample);
    const double inv_n = 1.0 / (ss * ss);
    for (int y = 0; y < cam.height; ++y) {
        for (int x = 0; x < cam.width; ++x) {
            Vec3 color{}, alb{};
            for (int sy = 0; sy < ss; ++sy) {
                for (int sx = 0; sx < ss; ++sx) {
                    double jx = (sx + 0.5) / ss;
                    double jy = (sy + 0.5) / ss;
                    SceneHit h = first_hit(scene, ray_for_pixel(cam, x, y, jx, jy), capture_idx);
                    if (!h.hit) continue;
                    alb += h.albedo;
                    if (point_in_shadow(scene, h.point, sun_dir, capture_idx)) {
                        color += h.albedo.cwise(scene.ambient_true);
                    } else {
                        color += soft_shadow_factor(scene, h.point, sun_dir) * h.albedo;
                    }
                }
            }
            gt.image.set_rgb(x, y, color * inv_n);
            gt.albedo.set_rgb(x, y, alb * inv_n);

            SceneHit hc = first_hit(scene, ray_for_pixel(cam, x, y), capture_idx);
            if (hc.hit) {
                gt.depth.at(x, y) = static_cast<float>(hc.t);
                bool sh = point_in_shadow(scene, hc.point, sun_dir, capture_idx);
                gt.shadow.at(x, y) = sh ? 1.0f : 0.0f;
                gt.softmask.at(x, y) =
                    static_cast<float>(1.0 - soft_shadow_factor(scene, hc.point, sun_dir));
            }
        }
    }
    return gt;
}

uint64_t scene_hash(const SynthScene& scene) {
    uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        h ^= bits;
        h *= 0x100000001b3ull;
    };
    mix(static_cast<double>(scene.seed));
    mix(scene.extent);
    for (const auto& b : scene.boxes) {
        for (int a = 0; a < 3; ++a) {
            mix(b.lo[a]);
            mix(b.hi[a]);
        }
        for (const auto& f : b.face_albedo)
            for (int a = 0; a < 3; ++a) mix(f[a]);
    }
    for (const auto& blob : scene.blobs) {
        for (int a = 0; a < 3; ++a) mix(blob.center[a]);
        mix(blob.radius);
        mix(blob.amplitude);
    }
    for (const auto& c : scene.captures) {
        mix(static_cast<double>(c.timestamp));
        mix(c.sun_azimuth_deg);
        mix(c.sun_elevation_deg);
        for (int a = 0; a < 3; ++a) mix(c.camera.view_dir[a]);
    }
    return h;
}

namespace {

nlohmann::ordered_json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }

}  // namespace

void make_dataset(const SynthScene& scene, const std::string& out_dir, int supersample) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir + "/images");
    fs::create_directories(out_dir + "/gt");
    fs::create_directories(out_dir + "/meta");

    const int n = static_cast<int>(scene.captures.size());
    char name[64];
    for (int i = 0; i < n; ++i) {
        const SynthCapture& cap = scene.captures[i];
        Vec3 sun = sun_dir_from_angles({cap.sun_azimuth_deg, cap.sun_elevation_deg});
        GroundTruth gt = render_ground_truth(scene, cap.camera, sun, i, supersample);

        std::snprintf(name, sizeof(name), "%s/images/%03d.ppm", out_dir.c_str(), i);
        write_ppm(name, gt.image);
        std::snprintf(name, sizeof(name), "%s/gt/%03d.depth.pfm", out_dir.c_str(), i);
        write_pfm(name, gt.depth);
        std::snprintf(name, sizeof(name), "%s/gt/%03d.albedo.pfm", out_dir.c_str(), i);
        write_pfm(name, gt.albedo);
        std::snprintf(name, sizeof(name), "%s/gt/%03d.shadow.pfm", out_dir.c_str(), i);
        write_pfm(name, gt.shadow);
        std::snprintf(name, sizeof(name), "%s/gt/%03d.softmask.pfm", out_dir.c_str(), i);
        write_pfm(name, gt.softmask);

        nlohmann::ordered_json meta;
        meta["id"] = i;
        meta["camera"] = {{"view_dir", vec_json(cap.camera.view_dir)},
                          {"right", vec_json(cap.camera.right)},
                          {"up", vec_json(cap.camera.up)},
                          {"center", vec_json(cap.camera.center)},
                          {"pixel_pitch", cap.camera.pixel_pitch},
                          {"width", cap.camera.width},
                          {"height", cap.camera.height}};
        meta["sun"] = {{"azimuth_deg", cap.sun_azimuth_deg},
                       {"elevation_deg", cap.sun_elevation_deg}};
        meta["timestamp"] = format_iso8601(cap.timestamp);
        meta["latitude"] = scene.latitude;
        meta["longitude"] = scene.longitude;
        if (scene.transient_box >= 0)
            meta["transient_present"] = scene.box_active(scene.transient_box, i);
        std::snprintf(name, sizeof(name), "%s/meta/%03d.json", out_dir.c_str(), i);
        std::ofstream mf(name);
        mf << meta.dump(2) << "\n";
    }

    int n_train = static_cast<int>(std::floor(0.75 * n));
    nlohmann::ordered_json manifest;
    manifest["version"] = 1;
    manifest["n_images"] = n;
    std::vector<int> train_ids, test_ids;
    for (int i = 0; i < n; ++i) (i < n_train ? train_ids : test_ids).push_back(i);
    manifest["train_ids"] = train_ids;
    manifest["test_ids"] = test_ids;
    manifest["seed"] = scene.seed;
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(scene_hash(scene)));
    manifest["scene_hash"] = hash_hex;
    manifest["bbox"] = {scene.bbox.lo.x, scene.bbox.lo.y, scene.bbox.lo.z,
                        scene.bbox.hi.x, scene.bbox.hi.y, scene.bbox.hi.z};
    manifest["latitude"] = scene.latitude;
    manifest["longitude"] = scene.longitude;
    manifest["ambient_true"] = vec_json(scene.ambient_true);
    manifest["transient"] = scene.transient_enabled;
    if (scene.transient_box >= 0) {
        manifest["transient_box"] = scene.transient_box;
        std::vector<int> present;
        for (int i = 0; i < n; ++i)
            if (scene.box_active(scene.transient_box, i)) present.push_back(i);
        manifest["transient_present_in"] = present;
    }
    std::ofstream mf(out_dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";
}

}  // namespace sundial
