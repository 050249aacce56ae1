#include "sundial/render.hpp"

namespace sundial {

void march(const SceneField& field, const Ray& ray, int n_samples,
           std::span<const double> jitters, RayMarch& out) {
    out.hit = false;
    out.opacity = 0.0;
    out.t_vals.clear();
    out.deltas.clear();
    out.sigmas.clear();
    out.trans.clear();
    out.weights.clear();
    out.cells.clear();
    out.raw.clear();

    double t0, t1;
    if (!intersect_aabb(ray, field.bbox(), 0.0, &t0, &t1) || t1 <= t0) {
        out.t_enter = out.t_exit = 0.0;
        out.trans.push_back(1.0);
        return;
    }
    out.hit = true;
    out.t_enter = t0;
    out.t_exit = t1;

    const int n = n_samples;
    const double span = t1 - t0;
    const double bin = span / n;
    const bool stratified = !jitters.empty();

    out.t_vals.resize(n);
    out.deltas.resize(n);
    for (int i = 0; i < n; ++i)
        out.t_vals[i] = t0 + (i + (stratified ? jitters[i] : 0.5)) * bin;
    if (stratified) {
        for (int i = 0; i + 1 < n; ++i) out.deltas[i] = out.t_vals[i + 1] - out.t_vals[i];
        out.deltas[n - 1] = t1 - out.t_vals[n - 1];
    } else {
        for (int i = 0; i < n; ++i) out.deltas[i] = bin;
    }

    const VoxelGrid& grid = field.main_grid();
    out.cells.resize(n);
    out.raw.resize(static_cast<size_t>(n) * kMainChannels);
    out.sigmas.resize(n);
    out.trans.resize(n + 1);
    out.weights.resize(n);

    double T = 1.0;
    for (int i = 0; i < n; ++i) {
        Vec3 x = ray.o + out.t_vals[i] * ray.d;
        out.cells[i] = grid.locate(x);
        grid.sample(out.cells[i], &out.raw[static_cast<size_t>(i) * kMainChannels]);
        double sigma = softplus(out.raw[static_cast<size_t>(i) * kMainChannels + kChDensity]);
        out.sigmas[i] = sigma;
        out.trans[i] = T;
        double e = std::exp(-sigma * out.deltas[i]);
        out.weights[i] = T * (1.0 - e);
        T *= e;
    }
    out.trans[n] = T;
    out.opacity = 1.0 - T;
}

RayMarch march_from_sigmas(std::span<const double> t_vals, std::span<const double> deltas,
                           std::span<const double> sigmas, double t_exit) {
    RayMarch m;
    m.hit = true;
    m.t_enter = t_vals.empty() ? 0.0 : t_vals.front();
    m.t_exit = t_exit;
    m.t_vals.assign(t_vals.begin(), t_vals.end());
    m.deltas.assign(deltas.begin(), deltas.end());
    m.sigmas.assign(sigmas.begin(), sigmas.end());
    const size_t n = m.t_vals.size();
    m.trans.resize(n + 1);
    m.weights.resize(n);
    double T = 1.0;
    for (size_t i = 0; i < n; ++i) {
        m.trans[i] = T;
        double e = std::exp(-m.sigmas[i] * m.deltas[i]);
        m.weights[i] = T * (1.0 - e);
        T *= e;
    }
    m.trans[n] = T;
    m.opacity = 1.0 - T;
    return m;
}

double composite_depth(const RayMarch& m, double opacity_floor) {
    if (!m.hit || m.opacity < opacity_floor) return m.t_exit;
    double d = 0.0;
    for (size_t i = 0; i < m.size(); ++i) d += m.weights[i] * m.t_vals[i];
    return d;
}

Vec3 density_normal(const SceneField& field, const Vec3& x, bool* degenerate) {
    const VoxelGrid& grid = field.main_grid();
    CellRef cell = grid.locate(x);
    // softplus'(raw) > 0 scales the gradient without turning it, so the raw
    // field's spatial gradient gives the same unit normal as sigma's.
    Vec3 g = grid.spatial_grad(cell, kChDensity);
    double n = norm(g);
    if (n < 1e-12) {
        if (degenerate) *degenerate = true;
        return {0.0, 0.0, 1.0};
    }
    if (degenerate) *degenerate = false;
    return g / (-n);
}

void march_weights_backward(const RayMarch& m, std::span<const double> d_weights,
                            double d_trans_end, std::span<double> d_sigmas) {
    const size_t n = m.size();
    double suffix = m.trans_end() * d_trans_end;
    for (size_t ii = n; ii-- > 0;) {
        d_sigmas[ii] = m.deltas[ii] * (m.trans[ii + 1] * d_weights[ii] - suffix);
        suffix += m.weights[ii] * d_weights[ii];
    }
}

}  // namespace sundial
