#include "sundial/image_io.hpp"

#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace sundial {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_or_throw(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::FILE* f) {
    std::string tok;
    int c;
    while ((c = std::fgetc(f)) != EOF) {
        if (c == '#') {
            while ((c = std::fgetc(f)) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw std::runtime_error("unexpected end of image header");
    return tok;
}

uint8_t quantize(float v) {
    if (v <= 0.0f) return 0;
    if (v >= 1.0f) return 255;
    return static_cast<uint8_t>(v * 255.0f + 0.5f);
}

}  // namespace

void write_ppm(const std::string& path, const Image& img) {
    if (img.channels != 3 && img.channels != 1)
        throw std::runtime_error("ppm writer needs 1 or 3 channels");
    auto f = open_or_throw(path, "wb");
    std::fprintf(f.get(), "P6\n%d %d\n255\n", img.width, img.height);
    std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                row[3 * x + c] = quantize(img.at(x, y, img.channels == 1 ? 0 : c));
        if (std::fwrite(row.data(), 1, row.size(), f.get()) != row.size())
            throw std::runtime_error("ppm write failed: " + path);
    }
}

Image read_ppm(const std::string& path) {
    auto f = open_or_throw(path, "rb");
    if (next_token(f.get()) != "P6") throw std::runtime_error("not a binary ppm: " + path);
    int w = std::stoi(next_token(f.get()));
    int h = std::stoi(next_token(f.get()));
    int maxval = std::stoi(next_token(f.get()));
    if (maxval != 255) throw std::runtime_error("unsupported ppm maxval in " + path);
    Image img(w, h, 3);
    std::vector<uint8_t> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        if (std::fread(row.data(), 1, row.size(), f.get()) != row.size())
            throw std::runtime_error("ppm truncated: " + path);
        for (size_t i = 0; i < row.size(); ++i)
            img.data[static_cast<size_t>(y) * w * 3 + i] = row[i] / 255.0f;
    }
    return img;
}

void write_pfm(const std::string& path, const Image& img) {
    if (img.channels != 3 && img.channels != 1)
        throw std::runtime_error("pfm writer needs 1 or 3 channels");
    auto f = open_or_throw(path, "wb");
    std::fprintf(f.get(), "%s\n%d %d\n-1.0\n", img.channels == 3 ? "PF" : "Pf", img.width,
                 img.height);
    const size_t row_floats = static_cast<size_t>(img.width) * img.channels;
    for (int y = img.height - 1; y >= 0; --y) {
        const float* row = img.data.data() + static_cast<size_t>(y) * row_floats;
        if (std::fwrite(row, sizeof(float), row_floats, f.get()) != row_floats)
            throw std::runtime_error("pfm write failed: " + path);
    }
}

Image read_pfm(const std::string& path) {
    auto f = open_or_throw(path, "rb");
    std::string magic = next_token(f.get());
    int channels;
    if (magic == "PF")
        channels = 3;
    else if (magic == "Pf")
        channels = 1;
    else
        throw std::runtime_error("not a pfm: " + path);
    int w = std::stoi(next_token(f.get()));
    int h = std::stoi(next_token(f.get()));
    double scale = std::stod(next_token(f.get()));
    if (scale >= 0.0) throw std::runtime_error("big-endian pfm unsupported: " + path);
    Image img(w, h, channels);
    const size_t row_floats = static_cast<size_t>(w) * channels;
    for (int y = h - 1; y >= 0; --y) {
        float* row = img.data.data() + static_cast<size_t>(y) * row_floats;
        if (std::fread(row, sizeof(float), row_floats, f.get()) != row_floats)
            throw std::runtime_error("pfm truncated: " + path);
    }
    return img;
}

}  // namespace sundial
