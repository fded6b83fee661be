#pragma once

#include <cstdint>
#include <random>

#include "wsi/config.hpp"
#include "wsi/model.hpp"
#include "wsi/tensor.hpp"

namespace wsi::test {

inline Tensor random_tensor(const Shape& shape, std::uint64_t seed, float scale = 1.0f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-scale, scale);
    Tensor t(shape);
    for (float& v : t.data()) v = dist(rng);
    return t;
}

inline ClipInput random_clip(const ModelConfig& config, std::uint64_t seed, float amplitude = 0.5f) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> dist(-amplitude, amplitude);
    ClipInput clip;
    clip.sample_rate_hz = config.sample_rate_hz;
    clip.left.resize(config.clip_samples());
    clip.right.resize(config.clip_samples());
    for (float& v : clip.left) v = dist(rng);
    for (float& v : clip.right) v = dist(rng);
    return clip;
}

// A 3-layer model small enough for exhaustive loops.
inline ModelConfig tiny_config() { return preset("pico"); }

}  // namespace wsi::test
