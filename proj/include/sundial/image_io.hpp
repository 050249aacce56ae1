// Float images plus PFM/PPM readers and writers. Both formats round-trip
// bit-exactly.
#pragma once

#include <string>
#include <vector>

#include "sundial/vec.hpp"

namespace sundial {

// Row-major, top row first, interleaved channels (1 or 3).
struct Image {
    int width = 0, height = 0, channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c) : width(w), height(h), channels(c),
                                 data(static_cast<size_t>(w) * h * c, 0.0f) {}

    float& at(int x, int y, int c = 0) {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c = 0) const {
        return data[(static_cast<size_t>(y) * width + x) * channels + c];
    }
    Vec3 rgb(int x, int y) const {
        if (channels == 1) {
            float v = at(x, y, 0);
            return {v, v, v};
        }
        return {at(x, y, 0), at(x, y, 1), at(x, y, 2)};
    }
    void set_rgb(int x, int y, const Vec3& v) {
        at(x, y, 0) = static_cast<float>(v.x);
        at(x, y, 1) = static_cast<float>(v.y);
        at(x, y, 2) = static_cast<float>(v.z);
    }
    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Binary PPM (P6, maxval 255); values clamped to [0,1] and quantized.
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);  // -> floats in [0,1]

// PFM, little-endian (scale -1.0), rows bottom-to-top per the format.
void write_pfm(const std::string& path, const Image& img);
Image read_pfm(const std::string& path);

}  // namespace sundial
