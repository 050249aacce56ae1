// Adaptive-moment optimizer over a parameter registry, with bias correction
// and serializable state.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sundial/field.hpp"

namespace sundial {

struct NonFiniteGrad : std::runtime_error {
    explicit NonFiniteGrad(const std::string& what) : std::runtime_error(what) {}
};

class Adam {
  public:
    Adam(const ParamStore& store, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    // One update using the gradients currently held by the store's entries,
    // scaled by grad_scale (gradient clipping factor). Entries whose index is
    // in `frozen` keep both parameters and moments untouched.
    void step(ParamStore& store, double lr, double grad_scale = 1.0,
              const std::vector<uint8_t>* frozen_entries = nullptr);

    uint64_t step_count() const { return step_; }

    // State round-trips through the SNDL container ("adam.m.<name>", ...).
    void save(const std::string& path, const ParamStore& store) const;
    void load(const std::string& path, const ParamStore& store);

  private:
    double beta1_, beta2_, eps_;
    uint64_t step_ = 0;
    std::vector<std::vector<float>> m_, v_;  // parallel to store entries
};

}  // namespace sundial
