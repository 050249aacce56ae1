// On-disk dataset loading: manifest, per-image metadata, pixels, GT layers.
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sundial/camera.hpp"
#include "sundial/image_io.hpp"
#include "sundial/vec.hpp"

namespace sundial {

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct ImageRecord {
    int id = 0;
    Image pixels;          // [0,1] floats
    OrthoCamera camera;
    double sun_azimuth_deg = 0.0;
    double sun_elevation_deg = 0.0;
    Vec3 sun_dir;          // from metadata angles
    int64_t timestamp = 0;
    bool transient_present = true;
};

struct Dataset {
    std::string root;
    std::vector<ImageRecord> images;   // indexed by id
    std::vector<int> train_ids, test_ids;
    Aabb bbox;
    double latitude = 0.0, longitude = 0.0;
    uint64_t seed = 0;
    std::string scene_hash;
    Vec3 ambient_true;
    bool has_ambient_true = false;

    const ImageRecord& image(int id) const { return images.at(id); }
};

Dataset load_dataset(const std::string& dir);

// GT layer access ("depth", "albedo", "shadow", "softmask"); throws DataError
// if the file is missing.
Image load_gt_layer(const Dataset& ds, int id, const std::string& layer);
bool has_gt_layer(const Dataset& ds, int id, const std::string& layer);

}  // namespace sundial
