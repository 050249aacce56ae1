#include "sundial/grid.hpp"

#include <cstring>

namespace sundial {

VoxelGrid::VoxelGrid(std::string name, int nx, int ny, int nz, int channels, const Aabb& bbox)
    : name_(std::move(name)), nx_(nx), ny_(ny), nz_(nz), channels_(channels), bbox_(bbox) {
    if (nx < 2 || ny < 2 || nz < 2) throw std::invalid_argument("grid dims must be >= 2");
    if (channels < 1) throw std::invalid_argument("grid needs at least one channel");
    Vec3 e = bbox.extent();
    if (e.x <= 0.0 || e.y <= 0.0 || e.z <= 0.0)
        throw std::invalid_argument("grid bbox must have positive extent");
    hx_ = e.x / (nx - 1);
    hy_ = e.y / (ny - 1);
    hz_ = e.z / (nz - 1);
    values_.assign(value_count(), 0.0f);
    grads_.assign(value_count(), 0.0f);
}

void VoxelGrid::zero_grads() {
    std::memset(grads_.data(), 0, grads_.size() * sizeof(float));
}

CellRef VoxelGrid::locate(const Vec3& x) const {
    CellRef c;
    const double u[3] = {(x.x - bbox_.lo.x) / hx_, (x.y - bbox_.lo.y) / hy_,
                         (x.z - bbox_.lo.z) / hz_};
    const int n[3] = {nx_, ny_, nz_};
    int idx[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        double v = u[a];
        if (v < 0.0) {
            if (v < -1.0) throw OutOfBounds(name_ + ": sample beyond clamp margin");
            v = 0.0;
        } else if (v > n[a] - 1) {
            if (v > n[a]) throw OutOfBounds(name_ + ": sample beyond clamp margin");
            v = n[a] - 1;
        }
        int i = static_cast<int>(v);
        if (i > n[a] - 2) i = n[a] - 2;
        idx[a] = i;
        frac[a] = v - i;
    }
    c.ix = idx[0];
    c.iy = idx[1];
    c.iz = idx[2];
    c.fx = frac[0];
    c.fy = frac[1];
    c.fz = frac[2];
    return c;
}

void VoxelGrid::sample(const CellRef& cell, double* out) const {
    const double wx[2] = {1.0 - cell.fx, cell.fx};
    const double wy[2] = {1.0 - cell.fy, cell.fy};
    const double wz[2] = {1.0 - cell.fz, cell.fz};
    for (int c = 0; c < channels_; ++c) out[c] = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double wab = wx[a] * wy[b];
            const float* base =
                values_.data() + vertex_index(cell.ix + a, cell.iy + b, cell.iz) * channels_;
            const double w0 = wab * wz[0];
            const double w1 = wab * wz[1];
            for (int c = 0; c < channels_; ++c)
                out[c] += w0 * base[c] + w1 * base[channels_ + c];
        }
    }
}

void VoxelGrid::sample_backward(const CellRef& cell, const double* upstream,
                                float* grad_buf) const {
    const double wx[2] = {1.0 - cell.fx, cell.fx};
    const double wy[2] = {1.0 - cell.fy, cell.fy};
    const double wz[2] = {1.0 - cell.fz, cell.fz};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double wab = wx[a] * wy[b];
            float* base = grad_buf + vertex_index(cell.ix + a, cell.iy + b, cell.iz) * channels_;
            const double w0 = wab * wz[0];
            const double w1 = wab * wz[1];
            for (int c = 0; c < channels_; ++c) {
                base[c] += static_cast<float>(w0 * upstream[c]);
                base[channels_ + c] += static_cast<float>(w1 * upstream[c]);
            }
        }
    }
}

Vec3 VoxelGrid::spatial_grad(const CellRef& cell, int c) const {
    const double wx[2] = {1.0 - cell.fx, cell.fx};
    const double wy[2] = {1.0 - cell.fy, cell.fy};
    const double wz[2] = {1.0 - cell.fz, cell.fz};
    double v[2][2][2];
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d)
                v[a][b][d] = value_at_vertex(cell.ix + a, cell.iy + b, cell.iz + d, c);
    Vec3 g;
    for (int b = 0; b < 2; ++b)
        for (int d = 0; d < 2; ++d) g.x += wy[b] * wz[d] * (v[1][b][d] - v[0][b][d]);
    for (int a = 0; a < 2; ++a)
        for (int d = 0; d < 2; ++d) g.y += wx[a] * wz[d] * (v[a][1][d] - v[a][0][d]);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) g.z += wx[a] * wy[b] * (v[a][b][1] - v[a][b][0]);
    g.x /= hx_;
    g.y /= hy_;
    g.z /= hz_;
    return g;
}

void VoxelGrid::spatial_grad_backward(const CellRef& cell, int c, const Vec3& upstream,
                                      float* grad_buf) const {
    const double wx[2] = {1.0 - cell.fx, cell.fx};
    const double wy[2] = {1.0 - cell.fy, cell.fy};
    const double wz[2] = {1.0 - cell.fz, cell.fz};
    const double gx = upstream.x / hx_;
    const double gy = upstream.y / hy_;
    const double gz = upstream.z / hz_;
    const double sgn[2] = {-1.0, 1.0};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            for (int d = 0; d < 2; ++d) {
                double contrib = sgn[a] * wy[b] * wz[d] * gx + sgn[b] * wx[a] * wz[d] * gy +
                                 sgn[d] * wx[a] * wy[b] * gz;
                grad_buf[vertex_index(cell.ix + a, cell.iy + b, cell.iz + d) * channels_ + c] +=
                    static_cast<float>(contrib);
            }
        }
    }
}

std::vector<double> sample_trilinear(const VoxelGrid& grid, const Vec3& x) {
    std::vector<double> out(grid.channels());
    grid.sample(grid.locate(x), out.data());
    return out;
}

void sample_backward(VoxelGrid& grid, const Vec3& x, const std::vector<double>& upstream) {
    grid.sample_backward(grid.locate(x), upstream.data(), grid.grads().data());
}

}  // namespace sundial
