// Primary-ray volumetric rendering: transmittance/weight chains, composites,
// and density-gradient normals, all with exact analytic backward passes.
#pragma once

#include <span>
#include <vector>

#include "sundial/field.hpp"
#include "sundial/vec.hpp"

namespace sundial {

// One marched primary ray. trans[i] is the transmittance *arriving* at sample
// i; trans[n] is the transmittance past the last sample (T_{N+1}).
struct RayMarch {
    bool hit = false;
    double t_enter = 0.0, t_exit = 0.0;
    std::vector<double> t_vals;    // strictly increasing sample distances
    std::vector<double> deltas;    // per-sample integration widths
    std::vector<double> sigmas;    // activated densities
    std::vector<double> trans;     // size n+1, trans[0] = 1
    std::vector<double> weights;   // T_i (1 - exp(-sigma_i delta_i))
    double opacity = 0.0;          // 1 - trans[n]

    // caches for the fused pipeline
    std::vector<CellRef> cells;        // main-grid cell per sample
    std::vector<double> raw;           // n * kMainChannels pre-activation values

    size_t size() const { return t_vals.size(); }
    double trans_end() const { return trans.empty() ? 1.0 : trans.back(); }
    Vec3 position(const Ray& ray, size_t i) const { return ray.o + t_vals[i] * ray.d; }
};

// Marches `n_samples` uniform bins between the bbox entry and exit points.
// `jitters` (one value in [0,1) per sample) enables stratified sampling;
// empty means midpoint rule with uniform deltas. A miss leaves hit=false and
// opacity 0.
void march(const SceneField& field, const Ray& ray, int n_samples,
           std::span<const double> jitters, RayMarch& out);

inline RayMarch march(const SceneField& field, const Ray& ray, int n_samples,
                      std::span<const double> jitters = {}) {
    RayMarch m;
    march(field, ray, n_samples, jitters, m);
    return m;
}

// Test/bring-up helper: builds the transmittance chain from explicit samples.
RayMarch march_from_sigmas(std::span<const double> t_vals, std::span<const double> deltas,
                           std::span<const double> sigmas, double t_exit);

// Sum of w_i t_i, or the bbox exit distance when the ray is effectively
// transparent (opacity below `opacity_floor`).
double composite_depth(const RayMarch& m, double opacity_floor = 0.01);

// Density-gradient surface normal, -grad(sigma)/|grad(sigma)|. Constant-density
// neighborhoods return +z with the degenerate flag set.
Vec3 density_normal(const SceneField& field, const Vec3& x, bool* degenerate = nullptr);

// Normalized learnable normal channels (spec op alias of the field accessor).
inline Vec3 predicted_normal(const SceneField& field, const Vec3& x, bool* degenerate = nullptr) {
    return field.predicted_normal_at(x, degenerate);
}

// Backward of the weight chain: given d(loss)/d(w_i) and d(loss)/d(T_end),
// produces d(loss)/d(sigma_i). Exact reverse of the forward recurrence.
void march_weights_backward(const RayMarch& m, std::span<const double> d_weights,
                            double d_trans_end, std::span<double> d_sigmas);

}  // namespace sundial
