#include "sundial/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "sundial/solarpos.hpp"

namespace sundial {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open " + path);
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw DataError("bad json in " + path + ": " + e.what());
    }
    return j;
}

Vec3 vec_from(const json& j) { return {j.at(0), j.at(1), j.at(2)}; }

std::string id_path(const std::string& root, const char* sub, int id, const char* suffix) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%s/%s/%03d%s", root.c_str(), sub, id, suffix);
    return buf;
}

}  // namespace

Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    ds.root = dir;
    json manifest = load_json(dir + "/manifest.json");
    int n = manifest.at("n_images");
    ds.train_ids = manifest.at("train_ids").get<std::vector<int>>();
    ds.test_ids = manifest.at("test_ids").get<std::vector<int>>();
    ds.seed = manifest.at("seed").get<uint64_t>();
    ds.scene_hash = manifest.value("scene_hash", "");
    auto bb = manifest.at("bbox");
    ds.bbox = {{bb.at(0), bb.at(1), bb.at(2)}, {bb.at(3), bb.at(4), bb.at(5)}};
    ds.latitude = manifest.at("latitude");
    ds.longitude = manifest.at("longitude");
    if (manifest.contains("ambient_true")) {
        ds.ambient_true = vec_from(manifest["ambient_true"]);
        ds.has_ambient_true = true;
    }

    ds.images.resize(n);
    for (int i = 0; i < n; ++i) {
        ImageRecord& rec = ds.images[i];
        rec.id = i;
        json meta = load_json(id_path(dir, "meta", i, ".json"));
        const json& cam = meta.at("camera");
        rec.camera.view_dir = vec_from(cam.at("view_dir"));
        rec.camera.right = vec_from(cam.at("right"));
        rec.camera.up = vec_from(cam.at("up"));
        rec.camera.center = vec_from(cam.at("center"));
        rec.camera.pixel_pitch = cam.at("pixel_pitch");
        rec.camera.width = cam.at("width");
        rec.camera.height = cam.at("height");
        rec.sun_azimuth_deg = meta.at("sun").at("azimuth_deg");
        rec.sun_elevation_deg = meta.at("sun").at("elevation_deg");
        rec.sun_dir = sun_dir_from_angles({rec.sun_azimuth_deg, rec.sun_elevation_deg});
        rec.timestamp = parse_iso8601(meta.at("timestamp").get<std::string>());
        rec.transient_present = meta.value("transient_present", true);
        rec.pixels = read_ppm(id_path(dir, "images", i, ".ppm"));
        if (rec.pixels.width != rec.camera.width || rec.pixels.height != rec.camera.height)
            throw DataError("image/camera size mismatch for id " + std::to_string(i));
    }
    if (ds.images.empty()) throw DataError("dataset has no images: " + dir);
    return ds;
}

Image load_gt_layer(const Dataset& ds, int id, const std::string& layer) {
    std::string path = id_path(ds.root, "gt", id, ("." + layer + ".pfm").c_str());
    if (!std::filesystem::exists(path)) throw DataError("missing ground-truth layer " + path);
    return read_pfm(path);
}

bool has_gt_layer(const Dataset& ds, int id, const std::string& layer) {
    return std::filesystem::exists(id_path(ds.root, "gt", id, ("." + layer + ".pfm").c_str()));
}

}  // namespace sundial
