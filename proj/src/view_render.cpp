#include "sundial/view_render.hpp"

#include <omp.h>

#include <thread>

namespace sundial {

ViewLayers render_view(const SceneField& field, const OrthoCamera& cam,
                       const PerImageParams& img, const Vec3& sun_dir0,
                       const ShadowConfig& shadow, const ViewRenderOptions& opt) {
    ViewLayers lay;
    lay.composed = Image(cam.width, cam.height, 3);
    lay.albedo = Image(cam.width, cam.height, 3);
    lay.shadow_prob = Image(cam.width, cam.height, 1);
    lay.wcomp = Image(cam.width, cam.height, 1);
    lay.ambient = Image(cam.width, cam.height, 3);
    lay.depth = Image(cam.width, cam.height, 1);
    lay.beta = Image(cam.width, cam.height, 1);

    int threads = opt.threads > 0 ? opt.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, threads);

    PixelRenderOptions popt;
    popt.primary_samples = opt.primary_samples;
    popt.secondary_samples = opt.secondary_samples;
    popt.stratified = false;
    popt.iter = opt.iter;
    popt.background = opt.background;
    popt.opacity_floor = opt.opacity_floor;

    Vec3 camb = img.ambient_color();

#pragma omp parallel num_threads(threads)
    {
        PixelRecord rec;
#pragma omp for schedule(static)
        for (int y = 0; y < cam.height; ++y) {
            for (int x = 0; x < cam.width; ++x) {
                Ray ray = ray_for_pixel(cam, x, y);
                const PixelOutputs& out =
                    render_pixel(field, ray, img, sun_dir0, shadow, popt, rec);
                lay.composed.set_rgb(x, y, out.color);
                lay.albedo.set_rgb(x, y, out.albedo);
                lay.shadow_prob.at(x, y) = static_cast<float>(1.0 - out.split.p_direct);
                lay.wcomp.at(x, y) = static_cast<float>(out.split.w_complex);
                lay.ambient.set_rgb(x, y, camb);
                lay.depth.at(x, y) = static_cast<float>(out.depth);
                lay.beta.at(x, y) = static_cast<float>(out.beta);
            }
        }
    }
    return lay;
}

}  // namespace sundial
