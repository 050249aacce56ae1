// Training loop: epoch-permuted ray batches across images, chunked
// deterministic gradient accumulation, adaptive-moment updates, schedules,
// checkpoints, CSV logging.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sundial/dataset.hpp"
#include "sundial/illumination.hpp"
#include "sundial/losses.hpp"
#include "sundial/optimizer.hpp"

namespace sundial {

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

struct TrainConfig {
    int batch_rays = 2048;
    int iters = 20000;
    double lr0 = 5e-4;
    double decay = 0.9;
    int decay_every = 0;  // 0 -> max(1, iters/10)
    uint64_t seed = 1;
    double sun_refine_start = 0.1;  // fraction of iters (metadata-sun mode)
    double clip_norm = 10.0;
    int ckpt_every = 5000;
    double sun_perturb_deg = 0.0;
    bool random_sun_init = false;
    int threads = 0;  // 0 -> hardware
    int primary_samples = 96;
    int secondary_samples = 64;
    Vec3 background{};
    double opacity_floor = 0.01;
    LossWeights loss;
    double shadow_kappa = 20.0;
    double shadow_xi = 5.0;
    double shadow_delta0_cells = 2.0;  // initial padding, in vertical cells
    double shadow_final_cells = 0.01;  // padding target at the last iteration
};

struct IterStats {
    int iter = 0;
    double lr = 0.0;
    LossBreakdown loss;
    double grad_norm = 0.0;
};

class Trainer {
  public:
    Trainer(const Dataset& ds, SceneField& field, const TrainConfig& cfg);

    // Full loop with checkpoints and logging; starts at the optimizer's step
    // count, so call resume() first to continue an existing run.
    void run(const std::string& run_dir);
    void resume(const std::string& run_dir);

    IterStats train_iteration(int iter);

    double learning_rate(int iter) const;
    int sun_refine_start_iter() const;
    const ShadowConfig& shadow_config() const { return shadow_; }
    ParamStore& params() { return store_; }
    Adam& optimizer() { return *adam_; }
    std::vector<PerImageParams>& image_params() { return img_params_; }
    int n_train() const { return static_cast<int>(train_ids_.size()); }
    int train_image_id(int ordinal) const { return train_ids_[ordinal]; }
    Vec3 initial_sun_dir(int ordinal) const { return sun_init_[ordinal]; }
    Vec3 refined_sun_dir(int ordinal) const;

    using GradObserver = std::function<void(const ParamStore&)>;
    void set_grad_observer(GradObserver fn) { observer_ = std::move(fn); }

    void write_sun_json(const std::string& path) const;
    void save_checkpoint(const std::string& run_dir, int iter) const;

  private:
    struct ChunkBuffers {
        std::vector<float> main, complex, transient, per_image;
    };
    struct RaySlot {
        int ordinal;
        int pixel;
    };

    void fill_batch(int iter, std::vector<RaySlot>& batch);
    const std::vector<uint32_t>& epoch_perm(int64_t epoch);

    const Dataset& ds_;
    SceneField& field_;
    TrainConfig cfg_;
    ShadowConfig shadow_;
    std::vector<int> train_ids_;
    std::vector<PerImageParams> img_params_;
    std::vector<Vec3> sun_init_;
    ParamStore store_;
    std::unique_ptr<Adam> adam_;
    std::vector<uint8_t> frozen_;  // per entry, for the sun-delay schedule
    std::vector<size_t> up_entry_indices_;
    std::vector<ChunkBuffers> buffers_;
    std::vector<PixelRecord> records_;
    std::vector<size_t> pixel_prefix_;  // cumulative pixels per train image
    int64_t cached_epoch_ = -1;
    std::vector<uint32_t> perm_cache_;
    int per_image_stride_ = 0;
    int threads_ = 1;
    GradObserver observer_;
};

// Convenience mean-parameter construction for rendering held-out views.
PerImageParams mean_image_params(const std::vector<PerImageParams>& params);

}  // namespace sundial
