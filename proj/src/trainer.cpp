#include "sundial/trainer.hpp"

#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "sundial/solarpos.hpp"

namespace sundial {

namespace {

constexpr int kChunks = 4;

Vec3 perturb_direction(const Vec3& d, double angle_deg, Rng& rng) {
    // Random axis perpendicular to d, rotate by the given angle (Rodrigues).
    Vec3 r{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    Vec3 axis = cross(d, r);
    double n = norm(axis);
    while (n < 1e-6) {
        r = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        axis = cross(d, r);
        n = norm(axis);
    }
    axis = axis / n;
    double a = deg2rad(angle_deg);
    return d * std::cos(a) + cross(axis, d) * std::sin(a) + axis * dot(axis, d) * (1.0 - std::cos(a));
}

}  // namespace

Trainer::Trainer(const Dataset& ds, SceneField& field, const TrainConfig& cfg)
    : ds_(ds), field_(field), cfg_(cfg) {
    if (ds.train_ids.size() < 2) throw DataError("training needs at least two images");
    train_ids_ = ds.train_ids;

    if (cfg_.decay_every <= 0) cfg_.decay_every = std::max(1, cfg_.iters / 10);

    // Shadow padding decays from delta0 to ~final_cells of a vertical cell.
    double cell_z = field.main_grid().cell_size().z;
    shadow_.kappa = cfg_.shadow_kappa;
    shadow_.xi = cfg_.shadow_xi;
    shadow_.delta0 = cfg_.shadow_delta0_cells * cell_z;
    double target = std::max(cfg_.shadow_final_cells * cell_z, 1e-6);
    shadow_.decay_k = cfg_.iters > 0 ? std::log(shadow_.delta0 / target) / cfg_.iters : 0.0;
    shadow_.n_shadow_samples = cfg_.secondary_samples;
    shadow_.validate();
    cfg_.loss.validate();

    // Per-image parameters and the sun initialization policy.
    Rng sun_rng(cfg_.seed ^ 0x9d2c5680c8f1e3a7ull);
    img_params_.reserve(train_ids_.size());
    for (size_t k = 0; k < train_ids_.size(); ++k) {
        PerImageParams p(field.embed_dim());
        p.ambient_color_raw = {-2.0f, -2.0f, -1.4f};  // dark, blue-leaning start
        Rng init_rng(cfg_.seed ^ hash_u64(0x1234, k));
        for (auto& v : p.transient_embedding) v = static_cast<float>(init_rng.normal(0.0, 0.01));
        img_params_.push_back(std::move(p));

        const ImageRecord& rec = ds.image(train_ids_[k]);
        Vec3 d0;
        if (cfg_.random_sun_init) {
            double az = sun_rng.uniform(0.0, 360.0);
            double el = sun_rng.uniform(30.0, 70.0);
            d0 = sun_dir_from_angles({az, el});
        } else if (cfg_.sun_perturb_deg > 0.0) {
            d0 = perturb_direction(rec.sun_dir, cfg_.sun_perturb_deg, sun_rng);
        } else {
            d0 = rec.sun_dir;
        }
        sun_init_.push_back(d0);
    }

    store_.add_field(field);
    store_.add_image_params(img_params_);
    adam_ = std::make_unique<Adam>(store_);

    frozen_.assign(store_.entries().size(), 0);
    for (size_t ei = 0; ei < store_.entries().size(); ++ei)
        if (store_.entries()[ei].name.find("up_raw") != std::string::npos)
            up_entry_indices_.push_back(ei);

    per_image_stride_ = 6 + field.embed_dim();
    threads_ = cfg_.threads > 0 ? cfg_.threads : static_cast<int>(std::thread::hardware_concurrency());
    threads_ = std::clamp(threads_, 1, kChunks);

    buffers_.resize(kChunks);
    records_.resize(kChunks);
    for (auto& b : buffers_) {
        b.main.assign(field.main_grid().value_count(), 0.0f);
        b.complex.assign(field.complex_grid().value_count(), 0.0f);
        b.transient.assign(field.transient_grid().value_count(), 0.0f);
        b.per_image.assign(train_ids_.size() * per_image_stride_, 0.0f);
    }

    pixel_prefix_.assign(train_ids_.size() + 1, 0);
    for (size_t k = 0; k < train_ids_.size(); ++k) {
        const ImageRecord& rec = ds.image(train_ids_[k]);
        pixel_prefix_[k + 1] = pixel_prefix_[k] + rec.pixels.pixel_count();
    }
}

double Trainer::learning_rate(int iter) const {
    return cfg_.lr0 * std::pow(cfg_.decay, static_cast<double>(iter / cfg_.decay_every));
}

int Trainer::sun_refine_start_iter() const {
    if (cfg_.random_sun_init) return 0;
    return static_cast<int>(cfg_.sun_refine_start * cfg_.iters);
}

Vec3 Trainer::refined_sun_dir(int ordinal) const {
    return refine_sun_direction(img_params_[ordinal], sun_init_[ordinal]).d_s;
}

const std::vector<uint32_t>& Trainer::epoch_perm(int64_t epoch) {
    if (cached_epoch_ == epoch) return perm_cache_;
    size_t total = pixel_prefix_.back();
    perm_cache_.resize(total);
    for (size_t i = 0; i < total; ++i) perm_cache_[i] = static_cast<uint32_t>(i);
    Rng rng(hash_u64(cfg_.seed, 0x9e0c1ull, static_cast<uint64_t>(epoch)));
    rng.shuffle(perm_cache_);
    cached_epoch_ = epoch;
    return perm_cache_;
}

void Trainer::fill_batch(int iter, std::vector<RaySlot>& batch) {
    batch.resize(cfg_.batch_rays);
    const size_t total = pixel_prefix_.back();
    int64_t start = static_cast<int64_t>(iter) * cfg_.batch_rays;
    for (int r = 0; r < cfg_.batch_rays; ++r) {
        int64_t g = start + r;
        int64_t epoch = g / static_cast<int64_t>(total);
        size_t off = static_cast<size_t>(g % static_cast<int64_t>(total));
        uint32_t flat = epoch_perm(epoch)[off];
        // binary search the image this flat pixel index belongs to
        size_t lo = 0, hi = train_ids_.size();
        while (lo + 1 < hi) {
            size_t mid = (lo + hi) / 2;
            if (pixel_prefix_[mid] <= flat)
                lo = mid;
            else
                hi = mid;
        }
        batch[r].ordinal = static_cast<int>(lo);
        batch[r].pixel = static_cast<int>(flat - pixel_prefix_[lo]);
    }
}

IterStats Trainer::train_iteration(int iter) {
    IterStats stats;
    stats.iter = iter;
    stats.lr = learning_rate(iter);
    const int B = cfg_.batch_rays;
    const int n_img = static_cast<int>(train_ids_.size());

    std::vector<RaySlot> batch;
    fill_batch(iter, batch);

    struct ChunkAcc {
        double photo = 0, wcomp = 0, normal = 0, orient = 0, dist = 0;
    };
    std::array<ChunkAcc, kChunks> acc{};

    const uint64_t jseed = hash_u64(cfg_.seed, 0x7a31, static_cast<uint64_t>(iter));

#pragma omp parallel for num_threads(threads_) schedule(static, 1)
    for (int c = 0; c < kChunks; ++c) {
        PixelRecord& rec = records_[c];
        ChunkBuffers& buf = buffers_[c];
        const int lo = c * B / kChunks;
        const int hi = (c + 1) * B / kChunks;
        PixelRenderOptions opt;
        opt.primary_samples = cfg_.primary_samples;
        opt.secondary_samples = cfg_.secondary_samples;
        opt.stratified = true;
        opt.jitter_seed = jseed;
        opt.iter = iter;
        opt.background = cfg_.background;
        opt.opacity_floor = cfg_.opacity_floor;
        for (int r = lo; r < hi; ++r) {
            const RaySlot slot = batch[r];
            const ImageRecord& im = ds_.image(train_ids_[slot.ordinal]);
            const PerImageParams& pp = img_params_[slot.ordinal];
            int px = slot.pixel % im.pixels.width;
            int py = slot.pixel / im.pixels.width;
            opt.ray_index = static_cast<uint64_t>(r);
            Ray ray = ray_for_pixel(im.camera, px, py);
            const PixelOutputs& out = render_pixel(field_, ray, pp, sun_init_[slot.ordinal],
                                                   shadow_, opt, rec);
            if (!out.hit) continue;
            Vec3 gt = im.pixels.rgb(px, py);
            Vec3 d_color;
            double d_beta;
            double lphoto =
                transient_loss_single_grad(out.color, gt, out.beta, cfg_.loss, &d_color, &d_beta);
            PixelUpstream upstream;
            upstream.d_color = d_color / B;
            upstream.d_beta = d_beta / B;
            upstream.d_w_complex = cfg_.loss.lambda_ci / B;
            upstream.d_normal_loss = cfg_.loss.lambda_normal / B;
            upstream.d_orient_loss = cfg_.loss.lambda_orient / B;
            upstream.d_distortion = cfg_.loss.lambda_dist / B;

            GradSink sink;
            sink.main_grid = buf.main.data();
            sink.complex_grid = buf.complex.data();
            sink.transient_grid = buf.transient.data();
            float* per_img = buf.per_image.data() + slot.ordinal * per_image_stride_;
            sink.ambient_raw = per_img;
            sink.up_raw = per_img + 3;
            sink.embedding = per_img + 6;
            render_pixel_backward(field_, rec, upstream, sink);

            acc[c].photo += lphoto;
            acc[c].wcomp += out.split.w_complex;
            acc[c].normal += out.normal_loss;
            acc[c].orient += out.orient_loss;
            acc[c].dist += out.distortion_loss;
        }
    }

    // Deterministic reduction: fixed chunk order regardless of thread count.
    ChunkAcc total{};
    for (const auto& a : acc) {
        total.photo += a.photo;
        total.wcomp += a.wcomp;
        total.normal += a.normal;
        total.orient += a.orient;
        total.dist += a.dist;
    }

    stats.loss.photometric = total.photo / B;
    stats.loss.ci = cfg_.loss.lambda_ci * total.wcomp / B;
    stats.loss.normal = cfg_.loss.lambda_normal * total.normal / B;
    stats.loss.orient = cfg_.loss.lambda_orient * total.orient / B;
    stats.loss.dist = cfg_.loss.lambda_dist * total.dist / B;

    // Reduce gradient buffers into the store (chunk order), zeroing buffers.
    auto reduce = [](std::span<float> dst, std::array<float*, kChunks> srcs, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            float s = 0.0f;
            for (int c = 0; c < kChunks; ++c) {
                s += srcs[c][i];
                srcs[c][i] = 0.0f;
            }
            dst[i] = s;
        }
    };
    auto& entries = store_.entries();
    {
        std::array<float*, kChunks> srcs;
        for (int c = 0; c < kChunks; ++c) srcs[c] = buffers_[c].main.data();
        reduce({entries[0].grads, entries[0].count}, srcs, entries[0].count);
        for (int c = 0; c < kChunks; ++c) srcs[c] = buffers_[c].complex.data();
        reduce({entries[1].grads, entries[1].count}, srcs, entries[1].count);
        for (int c = 0; c < kChunks; ++c) srcs[c] = buffers_[c].transient.data();
        reduce({entries[2].grads, entries[2].count}, srcs, entries[2].count);
        for (int k = 0; k < n_img; ++k) {
            for (int part = 0; part < 3; ++part) {
                const ParamEntry& e = entries[3 + 3 * k + part];
                int off = k * per_image_stride_ + (part == 0 ? 0 : part == 1 ? 3 : 6);
                std::array<float*, kChunks> s;
                for (int c = 0; c < kChunks; ++c) s[c] = buffers_[c].per_image.data() + off;
                reduce({e.grads, e.count}, s, e.count);
            }
        }
    }

    // Ambient color priors, applied across all training images each step.
    double white_sum = 0.0, blue_sum = 0.0;
    for (int k = 0; k < n_img; ++k) {
        PerImageParams& pp = img_params_[k];
        Vec3 camb = pp.ambient_color();
        Vec3 dw, db;
        white_sum += ambient_white_loss_grad(camb, cfg_.loss, &dw);
        blue_sum += ambient_blue_loss_grad(camb, cfg_.loss, &db);
        Vec3 d_camb = (dw + db) / static_cast<double>(n_img);
        const ParamEntry& e = entries[3 + 3 * k];  // ambient_raw
        for (int ch = 0; ch < 3; ++ch)
            e.grads[ch] += static_cast<float>(d_camb[ch] * sigmoid_prime_from_value(camb[ch]));
    }
    stats.loss.white = white_sum / n_img;
    stats.loss.blue = blue_sum / n_img;

    double loss_total = stats.loss.total();
    if (!std::isfinite(loss_total))
        throw NumericError("non-finite loss at iteration " + std::to_string(iter));

    // Sun-delay schedule.
    bool freeze_sun = iter < sun_refine_start_iter();
    for (size_t ei : up_entry_indices_) frozen_[ei] = freeze_sun ? 1 : 0;

    // Global-norm clipping over the active parameters.
    double norm_sq = 0.0;
    for (size_t ei = 0; ei < entries.size(); ++ei) {
        if (frozen_[ei]) continue;
        const ParamEntry& e = entries[ei];
        for (size_t i = 0; i < e.count; ++i)
            norm_sq += static_cast<double>(e.grads[i]) * e.grads[i];
    }
    stats.grad_norm = std::sqrt(norm_sq);
    double scale = 1.0;
    if (cfg_.clip_norm > 0.0 && stats.grad_norm > cfg_.clip_norm)
        scale = cfg_.clip_norm / stats.grad_norm;

    if (observer_) observer_(store_);

    adam_->step(store_, stats.lr, scale, &frozen_);
    return stats;
}

void Trainer::save_checkpoint(const std::string& run_dir, int iter) const {
    namespace fs = std::filesystem;
    fs::create_directories(run_dir + "/checkpoints");
    char name[512];
    std::snprintf(name, sizeof(name), "%s/checkpoints/ckpt_%06d.sndl", run_dir.c_str(), iter);
    store_.save(name);
    std::snprintf(name, sizeof(name), "%s/checkpoints/ckpt_%06d.opt", run_dir.c_str(), iter);
    adam_->save(name, store_);
}

void Trainer::resume(const std::string& run_dir) {
    store_.load(run_dir + "/final.sndl");
    adam_->load(run_dir + "/final.opt", store_);
}

void Trainer::run(const std::string& run_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(run_dir);
    const int start = static_cast<int>(adam_->step_count());
    std::ofstream log(run_dir + "/log.csv", start == 0 ? std::ios::trunc : std::ios::app);
    if (start == 0)
        log << "iter,lr,photometric,white,blue,ci,normal,orient,dist,total,grad_norm\n";
    char line[512];
    for (int iter = start; iter < cfg_.iters; ++iter) {
        IterStats s = train_iteration(iter);
        std::snprintf(line, sizeof(line),
                      "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.iter,
                      s.lr, s.loss.photometric, s.loss.white, s.loss.blue, s.loss.ci,
                      s.loss.normal, s.loss.orient, s.loss.dist, s.loss.total(), s.grad_norm);
        log << line;
        if (cfg_.ckpt_every > 0 && (iter + 1) % cfg_.ckpt_every == 0 && iter + 1 < cfg_.iters)
            save_checkpoint(run_dir, iter + 1);
    }
    log.flush();
    store_.save(run_dir + "/final.sndl");
    adam_->save(run_dir + "/final.opt", store_);
    write_sun_json(run_dir + "/sun_refined.json");
}

void Trainer::write_sun_json(const std::string& path) const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (size_t k = 0; k < train_ids_.size(); ++k) {
        SunAngles init = angles_from_sun_dir(sun_init_[k]);
        SunAngles refined = angles_from_sun_dir(refined_sun_dir(static_cast<int>(k)));
        nlohmann::ordered_json j;
        j["id"] = train_ids_[k];
        j["init_azimuth_deg"] = init.azimuth_deg;
        j["init_elevation_deg"] = init.elevation_deg;
        j["azimuth_deg"] = refined.azimuth_deg;
        j["elevation_deg"] = refined.elevation_deg;
        arr.push_back(j);
    }
    std::ofstream f(path);
    f << arr.dump(2) << "\n";
}

PerImageParams mean_image_params(const std::vector<PerImageParams>& params) {
    PerImageParams mean(params.empty() ? 4 : static_cast<int>(params[0].transient_embedding.size()));
    if (params.empty()) return mean;
    auto n = static_cast<float>(params.size());
    mean.ambient_color_raw = {0, 0, 0};
    mean.up_raw = {0, 0, 0};
    std::fill(mean.transient_embedding.begin(), mean.transient_embedding.end(), 0.0f);
    for (const auto& p : params) {
        for (int i = 0; i < 3; ++i) {
            mean.ambient_color_raw[i] += p.ambient_color_raw[i] / n;
            mean.up_raw[i] += p.up_raw[i] / n;
        }
        for (size_t i = 0; i < mean.transient_embedding.size(); ++i)
            mean.transient_embedding[i] += p.transient_embedding[i] / n;
    }
    return mean;
}

}  // namespace sundial
