// Whole-image rendering of a trained field: decomposition layers for one
// camera and sun direction.
#pragma once

#include "sundial/camera.hpp"
#include "sundial/illumination.hpp"
#include "sundial/image_io.hpp"

namespace sundial {

struct ViewRenderOptions {
    int primary_samples = 96;
    int secondary_samples = 64;
    int iter = 1 << 30;  // padding fully decayed unless overridden
    Vec3 background{};
    double opacity_floor = 0.01;
    int threads = 0;
};

struct ViewLayers {
    Image composed;     // 3ch
    Image albedo;       // 3ch
    Image shadow_prob;  // 1ch, 1 - P_di
    Image wcomp;        // 1ch
    Image ambient;      // 3ch (constant C_amb)
    Image depth;        // 1ch, meters
    Image beta;         // 1ch
};

ViewLayers render_view(const SceneField& field, const OrthoCamera& cam,
                       const PerImageParams& img, const Vec3& sun_dir0,
                       const ShadowConfig& shadow, const ViewRenderOptions& opt);

}  // namespace sundial
