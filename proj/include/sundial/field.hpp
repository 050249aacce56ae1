// Learnable scene representation: a 7-channel main grid (density, albedo,
// predicted normal), a 12-channel complex-illumination grid, a small
// transient-coefficient grid, and per-image parameter vectors.
#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "sundial/grid.hpp"
#include "sundial/rng.hpp"
#include "sundial/vec.hpp"

namespace sundial {

// Numerically stable activations; raw parameters may be anywhere in float range.
inline double stable_sigmoid(double x) {
    if (x >= 0.0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

inline double softplus(double x) {
    if (x > 30.0) return x;
    return std::log1p(std::exp(x));
}

// d softplus / dx
inline double softplus_prime(double x) { return stable_sigmoid(x); }

inline double sigmoid_prime_from_value(double s) { return s * (1.0 - s); }

// Main-grid channel layout.
inline constexpr int kChDensity = 0;
inline constexpr int kChAlbedo = 1;  // 3 channels
inline constexpr int kChNormal = 4;  // 3 channels
inline constexpr int kMainChannels = 7;

// Complex-grid channel layout: per color k, logit = bias_k + dir_row_k . d_s.
inline constexpr int kChComplexBias = 0;  // 3 channels
inline constexpr int kChComplexDir = 3;   // 9 channels, row-major 3x3
inline constexpr int kComplexChannels = 12;

struct PerImageParams {
    std::array<float, 3> ambient_color_raw{};  // sigmoid -> C_amb
    std::array<float, 3> up_raw{};             // normalize -> u_i
    std::vector<float> transient_embedding;    // t_i, length E

    std::array<float, 3> ambient_grad{};
    std::array<float, 3> up_grad{};
    std::vector<float> embedding_grad;

    explicit PerImageParams(int embed_dim = 4);

    Vec3 ambient_color() const {
        return {stable_sigmoid(ambient_color_raw[0]), stable_sigmoid(ambient_color_raw[1]),
                stable_sigmoid(ambient_color_raw[2])};
    }
    // Unit up vector; re-seeds to +z if the raw vector has collapsed.
    Vec3 up_unit() const;
};

// Non-owning view over one named parameter array.
struct ParamEntry {
    std::string name;
    std::vector<int> shape;
    float* values = nullptr;
    float* grads = nullptr;
    size_t count = 0;
};

class SceneField {
  public:
    struct Dims {
        int main_nx = 96, main_ny = 96, main_nz = 48;
        int aux_nx = 48, aux_ny = 48, aux_nz = 24;
        int embed_dim = 4;
    };

    SceneField(const Aabb& bbox, const Dims& dims, uint64_t seed);

    const Aabb& bbox() const { return main_.bbox(); }
    VoxelGrid& main_grid() { return main_; }
    const VoxelGrid& main_grid() const { return main_; }
    VoxelGrid& complex_grid() { return complex_; }
    const VoxelGrid& complex_grid() const { return complex_; }
    VoxelGrid& transient_grid() { return transient_; }
    const VoxelGrid& transient_grid() const { return transient_; }
    int embed_dim() const { return embed_dim_; }
    double transient_bias() const { return transient_bias_; }

    double density_at(const Vec3& x) const;
    Vec3 albedo_at(const Vec3& x) const;
    Vec3 predicted_normal_at(const Vec3& x, bool* degenerate = nullptr) const;
    // sigmoid(f0(x) + F1(x) * d_s) per channel
    Vec3 complex_color_at(const Vec3& x, const Vec3& sun_dir) const;
    std::vector<double> complex_coeffs_at(const Vec3& x) const;
    std::vector<double> transient_coeffs_at(const Vec3& x) const;
    // softplus(g(x) . t_i + b0)
    double transient_beta_at(const Vec3& x, const std::vector<float>& embedding) const;

  private:
    VoxelGrid main_;
    VoxelGrid complex_;
    VoxelGrid transient_;
    int embed_dim_;
    double transient_bias_ = -2.0;
};

// Named registry over every learnable scalar; each scalar is reachable through
// exactly one entry. Backs checkpointing and the optimizer.
class ParamStore {
  public:
    void add_grid(VoxelGrid& grid);
    void add_field(SceneField& field);
    void add_image_params(std::vector<PerImageParams>& params);

    const std::vector<ParamEntry>& entries() const { return entries_; }
    size_t total_count() const;
    void zero_grads();

    void save(const std::string& path) const;
    // Strict by-name load; shapes must match exactly.
    void load(const std::string& path);

  private:
    void add_entry(std::string name, std::vector<int> shape, float* values, float* grads);
    std::vector<ParamEntry> entries_;
};

}  // namespace sundial
