// Secondary shadow rays, the direct/ambient/complex weight split, and the
// full per-pixel forward/backward rendering pipeline built on them.
#pragma once

#include <cstdint>
#include <vector>

#include "sundial/render.hpp"
#include "sundial/sunmodel.hpp"

namespace sundial {

struct ShadowConfig {
    double kappa = 20.0;
    double xi = 5.0;
    double delta0 = 2.0;       // initial surface padding, meters
    double decay_k = 0.0;      // per-iteration decay rate of the padding
    int n_shadow_samples = 64;

    // kappa > 2 xi keeps W_comp peaked at P = 0.5 and small at the endpoints.
    void validate() const;
    double padding(int iter) const { return delta0 * std::exp(-decay_k * iter); }
};

struct IlluminationSplit {
    double p_direct = 1.0;
    double w_direct = 0.0, w_ambient = 0.0, w_complex = 0.0;
    Vec3 term_direct, term_ambient, term_complex;
};

// Secondary-ray origin: the surface estimate pulled back toward the camera by
// the decaying padding.
Vec3 shadow_origin(const Ray& ray, double depth, int iter, const ShadowConfig& cfg);

// Eq.-style weight split from the direct-light probability. Partition of
// unity holds exactly.
void illumination_weights(double p_direct, const ShadowConfig& cfg, double* w_direct,
                          double* w_ambient, double* w_complex);
double complex_weight(double p_direct, const ShadowConfig& cfg);
double complex_weight_dp(double p_direct, const ShadowConfig& cfg);

// W_di c_alb + W_amb c_alb (*) C_amb + W_comp c_alb (*) c_ci, products elementwise.
Vec3 compose_color(const Vec3& albedo, const Vec3& ambient, const Vec3& complex_color,
                   double w_direct, double w_ambient, double w_complex);

// ---------------------------------------------------------------------------
// Secondary shadow march

struct SecondaryMarch {
    Vec3 origin, dir;
    bool miss = false;       // ray never enters the bbox: P = 1
    bool reentry = false;    // origin outside the bbox, ray re-enters
    double s0 = 0.0;         // march start distance
    double length = 0.0;     // marched span
    double delta = 0.0;      // length / n
    int exit_axis = 2;
    double exit_face = 0.0;
    std::vector<CellRef> cells;
    std::vector<double> raw_density;
    double sum_sigma = 0.0;
    double p = 1.0;          // final transmittance
};

// Marches from o_s toward the sun until bbox exit; returns the final
// transmittance (the direct-light probability). Density is zero outside the
// bbox, so rays that exit immediately report P = 1.
double secondary_march(const SceneField& field, const Vec3& o_s, const Vec3& d_s, int n_samples,
                       SecondaryMarch& rec);

inline double direct_light_probability(const SceneField& field, const Vec3& o_s, const Vec3& d_s,
                                       int n_samples) {
    SecondaryMarch rec;
    return secondary_march(field, o_s, d_s, n_samples, rec);
}

// Backward through the secondary march: accumulates density-grid gradients
// into main_grad and returns the gradients w.r.t. the ray origin and
// direction (the position paths through sample placement and exit length).
// The rare re-entry case treats the marched span as constant.
void secondary_march_backward(const SceneField& field, const SecondaryMarch& rec,
                              double d_p_upstream, float* main_grad, Vec3* g_origin, Vec3* g_dir);

// ---------------------------------------------------------------------------
// Fused per-pixel pipeline

struct PixelRenderOptions {
    int primary_samples = 96;
    int secondary_samples = 64;
    bool stratified = false;
    uint64_t jitter_seed = 0;
    uint64_t ray_index = 0;   // combined with the seed for stateless jitter
    int iter = 0;
    Vec3 background{0.0, 0.0, 0.0};
    double opacity_floor = 0.01;
};

struct PixelOutputs {
    bool hit = false;
    Vec3 color;
    double depth = 0.0;
    bool depth_background = false;
    Vec3 albedo;            // composited
    double beta = 0.0;      // composited transient uncertainty
    IlluminationSplit split;
    Vec3 sun_dir;           // refined
    // per-ray geometric regularizer values (weight-scaled sums over samples)
    double normal_loss = 0.0;
    double orient_loss = 0.0;
    double distortion_loss = 0.0;
};

// Everything the backward pass needs, reusable across rays to avoid churn.
struct PixelRecord {
    Ray ray;
    PixelRenderOptions opt;
    ShadowConfig cfg;
    std::vector<double> jitters;
    RayMarch march;
    // per-sample quantities
    std::vector<Vec3> albedo;          // activated
    std::vector<Vec3> normal_raw;      // sampled normal channels
    std::vector<double> normal_raw_norm;
    std::vector<Vec3> normal_pred;     // unit
    std::vector<uint8_t> normal_degen;
    std::vector<Vec3> grad_raw;        // spatial gradient of raw density
    std::vector<double> grad_raw_norm;
    std::vector<Vec3> normal_dens;     // unit density normal
    std::vector<uint8_t> dens_degen;
    std::vector<CellRef> cells_transient;
    std::vector<double> beta_arg;      // pre-activation
    std::vector<double> beta_s;        // softplus values
    std::vector<double> trans_coeff;   // n * E sampled transient coefficients
    std::vector<float> img_embedding;  // copy of the image's t_i
    // surface / illumination
    SunRotation sun;
    SecondaryMarch shadow;
    Vec3 surface_point;
    CellRef cell_complex;
    std::vector<double> complex_coeff;  // 12
    Vec3 complex_logits;
    Vec3 complex_color;
    Vec3 ambient_color;
    PixelOutputs out;
    // scratch (reused across rays)
    std::vector<double> d_weights;
    std::vector<double> d_sigmas;
    std::vector<double> prefix_w;
    std::vector<double> prefix_ws;
    std::vector<uint8_t> skip_normal;
    std::vector<uint8_t> skip_orient;
};

// Destination for accumulated parameter gradients (one per worker chunk).
struct GradSink {
    float* main_grid = nullptr;
    float* complex_grid = nullptr;
    float* transient_grid = nullptr;
    float* ambient_raw = nullptr;  // [3] for this ray's image
    float* up_raw = nullptr;       // [3]
    float* embedding = nullptr;    // [E]
};

struct PixelUpstream {
    Vec3 d_color;
    double d_depth = 0.0;
    double d_beta = 0.0;
    double d_p_direct = 0.0;
    double d_w_complex = 0.0;
    double d_normal_loss = 0.0;
    double d_orient_loss = 0.0;
    double d_distortion = 0.0;
};

// Full forward pass. `sun_dir0` is the image's initial sun direction; the
// refined direction is computed inside so its gradient path stays intact.
const PixelOutputs& render_pixel(const SceneField& field, const Ray& ray,
                                 const PerImageParams& img, const Vec3& sun_dir0,
                                 const ShadowConfig& shadow, const PixelRenderOptions& opt,
                                 PixelRecord& rec);

// Exact analytic backward of render_pixel. The record is the one filled by
// the matching forward call; its scratch buffers are reused.
void render_pixel_backward(const SceneField& field, PixelRecord& rec, const PixelUpstream& up,
                           const GradSink& sink);

}  // namespace sundial
