#include "sundial/optimizer.hpp"

#include <cmath>

#include "sundial/checkpoint.hpp"

namespace sundial {

Adam::Adam(const ParamStore& store, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& e : store.entries()) {
        m_.emplace_back(e.count, 0.0f);
        v_.emplace_back(e.count, 0.0f);
    }
}

void Adam::step(ParamStore& store, double lr, double grad_scale,
                const std::vector<uint8_t>* frozen_entries) {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    auto& entries = store.entries();
    for (size_t ei = 0; ei < entries.size(); ++ei) {
        if (frozen_entries && (*frozen_entries)[ei]) continue;
        const ParamEntry& e = entries[ei];
        float* m = m_[ei].data();
        float* v = v_[ei].data();
        for (size_t i = 0; i < e.count; ++i) {
            double g = static_cast<double>(e.grads[i]) * grad_scale;
            if (!std::isfinite(g)) throw NonFiniteGrad("non-finite gradient in " + e.name);
            double mi = beta1_ * m[i] + (1.0 - beta1_) * g;
            double vi = beta2_ * v[i] + (1.0 - beta2_) * g * g;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            double update = lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps_);
            e.values[i] = static_cast<float>(e.values[i] - update);
        }
    }
}

void Adam::save(const std::string& path, const ParamStore& store) const {
    std::vector<CheckpointEntry> out;
    auto& entries = store.entries();
    for (size_t ei = 0; ei < entries.size(); ++ei) {
        CheckpointEntry cm;
        cm.name = "adam.m." + entries[ei].name;
        cm.shape = {static_cast<uint32_t>(m_[ei].size())};
        cm.data = m_[ei];
        out.push_back(std::move(cm));
        CheckpointEntry cv;
        cv.name = "adam.v." + entries[ei].name;
        cv.shape = {static_cast<uint32_t>(v_[ei].size())};
        cv.data = v_[ei];
        out.push_back(std::move(cv));
    }
    CheckpointEntry cs;
    cs.name = "adam.step";
    cs.shape = {1};
    cs.data = {static_cast<float>(step_)};  // exact below 2^24 steps
    out.push_back(std::move(cs));
    write_checkpoint(path, out);
}

void Adam::load(const std::string& path, const ParamStore& store) {
    auto in = read_checkpoint(path);
    auto find = [&](const std::string& name) -> const CheckpointEntry& {
        for (const auto& e : in)
            if (e.name == name) return e;
        throw std::runtime_error("optimizer state missing entry " + name);
    };
    auto& entries = store.entries();
    for (size_t ei = 0; ei < entries.size(); ++ei) {
        const auto& cm = find("adam.m." + entries[ei].name);
        const auto& cv = find("adam.v." + entries[ei].name);
        if (cm.data.size() != m_[ei].size() || cv.data.size() != v_[ei].size())
            throw std::runtime_error("optimizer state shape mismatch for " + entries[ei].name);
        m_[ei] = cm.data;
        v_[ei] = cv.data;
    }
    step_ = static_cast<uint64_t>(find("adam.step").data.at(0));
}

}  // namespace sundial
