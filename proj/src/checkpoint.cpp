#include "sundial/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <memory>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; big-endian hosts unsupported");

namespace sundial {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_u32(std::FILE* f, uint32_t v) {
    if (std::fwrite(&v, sizeof(v), 1, f) != 1) throw std::runtime_error("checkpoint write failed");
}

uint32_t read_u32(std::FILE* f) {
    uint32_t v = 0;
    if (std::fread(&v, sizeof(v), 1, f) != 1) throw std::runtime_error("checkpoint truncated");
    return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& entries) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    if (std::fwrite("SNDL", 1, 4, f.get()) != 4) throw std::runtime_error("checkpoint write failed");
    write_u32(f.get(), kCheckpointVersion);
    write_u32(f.get(), static_cast<uint32_t>(entries.size()));
    for (const auto& e : entries) {
        write_u32(f.get(), static_cast<uint32_t>(e.name.size()));
        if (std::fwrite(e.name.data(), 1, e.name.size(), f.get()) != e.name.size())
            throw std::runtime_error("checkpoint write failed");
        write_u32(f.get(), static_cast<uint32_t>(e.shape.size()));
        size_t n = 1;
        for (uint32_t d : e.shape) {
            write_u32(f.get(), d);
            n *= d;
        }
        if (n != e.data.size()) throw std::runtime_error("checkpoint entry shape/data mismatch");
        if (std::fwrite(e.data.data(), sizeof(float), n, f.get()) != n)
            throw std::runtime_error("checkpoint write failed");
    }
    if (std::fflush(f.get()) != 0) throw std::runtime_error("checkpoint flush failed");
}

std::vector<CheckpointEntry> read_checkpoint(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, f.get()) != 4 || std::string(magic, 4) != "SNDL")
        throw std::runtime_error("not a SNDL checkpoint: " + path);
    uint32_t version = read_u32(f.get());
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    uint32_t count = read_u32(f.get());
    std::vector<CheckpointEntry> entries(count);
    for (auto& e : entries) {
        uint32_t name_len = read_u32(f.get());
        e.name.resize(name_len);
        if (std::fread(e.name.data(), 1, name_len, f.get()) != name_len)
            throw std::runtime_error("checkpoint truncated");
        uint32_t rank = read_u32(f.get());
        e.shape.resize(rank);
        size_t n = 1;
        for (auto& d : e.shape) {
            d = read_u32(f.get());
            n *= d;
        }
        e.data.resize(n);
        if (std::fread(e.data.data(), sizeof(float), n, f.get()) != n)
            throw std::runtime_error("checkpoint truncated");
    }
    return entries;
}

}  // namespace sundial
