// SNDL checkpoint container: little-endian binary, exact f32 round-trip.
// Layout: magic "SNDL", version u32, entry count u32; per entry:
//   name_len u32, name bytes, rank u32, dims u32[rank], payload f32[prod dims].
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sundial {

struct CheckpointEntry {
    std::string name;
    std::vector<uint32_t> shape;
    std::vector<float> data;
};

inline constexpr uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::string& path, const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_checkpoint(const std::string& path);

}  // namespace sundial
