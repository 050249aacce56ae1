#include "sundial/field.hpp"

#include <map>

#include "sundial/checkpoint.hpp"

namespace sundial {

PerImageParams::PerImageParams(int embed_dim)
    : transient_embedding(embed_dim, 0.0f), embedding_grad(embed_dim, 0.0f) {
    up_raw = {0.0f, 0.0f, 1.0f};
}

Vec3 PerImageParams::up_unit() const {
    Vec3 u{up_raw[0], up_raw[1], up_raw[2]};
    double n = norm(u);
    if (n < 1e-8) return {0.0, 0.0, 1.0};  // re-seed rule
    return u / n;
}

SceneField::SceneField(const Aabb& bbox, const Dims& dims, uint64_t seed)
    : main_("field.main", dims.main_nx, dims.main_ny, dims.main_nz, kMainChannels, bbox),
      complex_("field.complex", dims.aux_nx, dims.aux_ny, dims.aux_nz, kComplexChannels, bbox),
      transient_("field.transient", dims.aux_nx, dims.aux_ny, dims.aux_nz, dims.embed_dim, bbox),
      embed_dim_(dims.embed_dim) {
    Rng rng(seed);
    auto& mv = main_.values();
    const int mc = main_.channels();
    for (size_t v = 0; v < main_.vertex_count(); ++v) {
        // Density raw starts at -1 (near-empty scene); everything else N(0, 0.01^2).
        mv[v * mc + kChDensity] = -1.0f;
        for (int c = 1; c < mc; ++c) mv[v * mc + c] = static_cast<float>(rng.normal(0.0, 0.01));
    }
    for (auto& x : complex_.values()) x = static_cast<float>(rng.normal(0.0, 0.01));
    for (auto& x : transient_.values()) x = static_cast<float>(rng.normal(0.0, 0.01));
}

double SceneField::density_at(const Vec3& x) const {
    CellRef cell = main_.locate(x);
    double out[kMainChannels];
    main_.sample(cell, out);
    return softplus(out[kChDensity]);
}

Vec3 SceneField::albedo_at(const Vec3& x) const {
    CellRef cell = main_.locate(x);
    double out[kMainChannels];
    main_.sample(cell, out);
    return {stable_sigmoid(out[kChAlbedo]), stable_sigmoid(out[kChAlbedo + 1]),
            stable_sigmoid(out[kChAlbedo + 2])};
}

Vec3 SceneField::predicted_normal_at(const Vec3& x, bool* degenerate) const {
    CellRef cell = main_.locate(x);
    double out[kMainChannels];
    main_.sample(cell, out);
    return normalized_or_up({out[kChNormal], out[kChNormal + 1], out[kChNormal + 2]}, degenerate);
}

std::vector<double> SceneField::complex_coeffs_at(const Vec3& x) const {
    CellRef cell = complex_.locate(x);
    std::vector<double> out(kComplexChannels);
    complex_.sample(cell, out.data());
    return out;
}

std::vector<double> SceneField::transient_coeffs_at(const Vec3& x) const {
    CellRef cell = transient_.locate(x);
    std::vector<double> out(embed_dim_);
    transient_.sample(cell, out.data());
    return out;
}

Vec3 SceneField::complex_color_at(const Vec3& x, const Vec3& sun_dir) const {
    auto coef = complex_coeffs_at(x);
    Vec3 c;
    for (int k = 0; k < 3; ++k) {
        double logit = coef[kChComplexBias + k] + coef[kChComplexDir + 3 * k] * sun_dir.x +
                       coef[kChComplexDir + 3 * k + 1] * sun_dir.y +
                       coef[kChComplexDir + 3 * k + 2] * sun_dir.z;
        c[k] = stable_sigmoid(logit);
    }
    return c;
}

double SceneField::transient_beta_at(const Vec3& x, const std::vector<float>& embedding) const {
    auto g = transient_coeffs_at(x);
    double s = transient_bias_;
    for (size_t i = 0; i < g.size() && i < embedding.size(); ++i) s += g[i] * embedding[i];
    return softplus(s);
}

void ParamStore::add_entry(std::string name, std::vector<int> shape, float* values, float* grads) {
    size_t n = 1;
    for (int d : shape) n *= static_cast<size_t>(d);
    for (const auto& e : entries_) {
        if (e.name == name) throw std::invalid_argument("duplicate parameter name: " + name);
        // No aliased parameters: reject overlapping storage.
        const float* a0 = e.values;
        const float* a1 = e.values + e.count;
        if (values < a1 && a0 < values + n)
            throw std::invalid_argument("aliased parameter storage: " + name);
    }
    entries_.push_back({std::move(name), std::move(shape), values, grads, n});
}

void ParamStore::add_grid(VoxelGrid& grid) {
    add_entry(grid.name(), {grid.nx(), grid.ny(), grid.nz(), grid.channels()},
              grid.values().data(), grid.grads().data());
}

void ParamStore::add_field(SceneField& field) {
    add_grid(field.main_grid());
    add_grid(field.complex_grid());
    add_grid(field.transient_grid());
}

void ParamStore::add_image_params(std::vector<PerImageParams>& params) {
    char name[64];
    for (size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        std::snprintf(name, sizeof(name), "img%03zu.ambient_raw", i);
        add_entry(name, {3}, p.ambient_color_raw.data(), p.ambient_grad.data());
        std::snprintf(name, sizeof(name), "img%03zu.up_raw", i);
        add_entry(name, {3}, p.up_raw.data(), p.up_grad.data());
        std::snprintf(name, sizeof(name), "img%03zu.embedding", i);
        add_entry(name, {static_cast<int>(p.transient_embedding.size())},
                  p.transient_embedding.data(), p.embedding_grad.data());
    }
}

size_t ParamStore::total_count() const {
    size_t n = 0;
    for (const auto& e : entries_) n += e.count;
    return n;
}

void ParamStore::zero_grads() {
    for (auto& e : entries_)
        for (size_t i = 0; i < e.count; ++i) e.grads[i] = 0.0f;
}

void ParamStore::save(const std::string& path) const {
    std::vector<CheckpointEntry> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) {
        CheckpointEntry ce;
        ce.name = e.name;
        ce.shape.assign(e.shape.begin(), e.shape.end());
        ce.data.assign(e.values, e.values + e.count);
        out.push_back(std::move(ce));
    }
    write_checkpoint(path, out);
}

void ParamStore::load(const std::string& path) {
    auto in = read_checkpoint(path);
    std::map<std::string, const CheckpointEntry*> by_name;
    for (const auto& e : in) by_name[e.name] = &e;
    for (auto& e : entries_) {
        auto it = by_name.find(e.name);
        if (it == by_name.end())
            throw std::runtime_error("checkpoint missing parameter: " + e.name);
        const auto& ce = *it->second;
        if (ce.data.size() != e.count)
            throw std::runtime_error("checkpoint shape mismatch for " + e.name);
        std::copy(ce.data.begin(), ce.data.end(), e.values);
    }
}

}  // namespace sundial
