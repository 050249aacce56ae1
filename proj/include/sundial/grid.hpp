// Dense trilinear voxel grids with analytic forward/backward sampling.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sundial/vec.hpp"

namespace sundial {

struct OutOfBounds : std::out_of_range {
    explicit OutOfBounds(const std::string& what) : std::out_of_range(what) {}
};

// Cell lookup for one sample position: base vertex and fractional offsets.
// Weights for the 8 surrounding vertices factor as wx*wy*wz.
struct CellRef {
    int ix = 0, iy = 0, iz = 0;
    double fx = 0.0, fy = 0.0, fz = 0.0;
};

class VoxelGrid {
  public:
    VoxelGrid() = default;
    VoxelGrid(std::string name, int nx, int ny, int nz, int channels, const Aabb& bbox);

    const std::string& name() const { return name_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    int nz() const { return nz_; }
    int channels() const { return channels_; }
    const Aabb& bbox() const { return bbox_; }
    Vec3 cell_size() const { return {hx_, hy_, hz_}; }

    size_t vertex_count() const { return static_cast<size_t>(nx_) * ny_ * nz_; }
    size_t value_count() const { return vertex_count() * channels_; }

    std::vector<float>& values() { return values_; }
    const std::vector<float>& values() const { return values_; }
    std::vector<float>& grads() { return grads_; }
    const std::vector<float>& grads() const { return grads_; }

    void zero_grads();

    // Maps a world point to its cell, clamping positions up to one cell
    // outside the bbox onto the boundary. Throws OutOfBounds beyond that.
    CellRef locate(const Vec3& x) const;

    size_t vertex_index(int ix, int iy, int iz) const {
        return (static_cast<size_t>(ix) * ny_ + iy) * nz_ + iz;
    }

    // Trilinear interpolation of all channels at `cell` into `out`.
    void sample(const CellRef& cell, double* out) const;

    // Accumulates upstream * (trilinear weights) into `grad_buf`, which must
    // have value_count() entries (the grid's own grads() or a worker buffer).
    void sample_backward(const CellRef& cell, const double* upstream, float* grad_buf) const;

    // Analytic spatial gradient d(channel c)/dx of the trilinear interpolant.
    Vec3 spatial_grad(const CellRef& cell, int c) const;

    // Backward of spatial_grad: given d(loss)/d(grad vector), accumulate into
    // vertex-value grads.
    void spatial_grad_backward(const CellRef& cell, int c, const Vec3& upstream,
                               float* grad_buf) const;

    double value_at_vertex(int ix, int iy, int iz, int c) const {
        return values_[vertex_index(ix, iy, iz) * channels_ + c];
    }

  private:
    std::string name_;
    int nx_ = 0, ny_ = 0, nz_ = 0, channels_ = 0;
    Aabb bbox_{};
    double hx_ = 1.0, hy_ = 1.0, hz_ = 1.0;
    std::vector<float> values_;
    std::vector<float> grads_;
};

// Convenience wrappers matching the one-shot call signatures used by tests.
std::vector<double> sample_trilinear(const VoxelGrid& grid, const Vec3& x);
void sample_backward(VoxelGrid& grid, const Vec3& x, const std::vector<double>& upstream);

}  // namespace sundial
