#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wsi {

// Architecture hyperparameters for the interruption detector.
struct ModelConfig {
    std::size_t conv_channels = 128;
    std::size_t hidden = 288;
    std::size_t num_layers = 12;
    std::size_t heads = 6;
    std::size_t ffn_ratio = 4;
    std::size_t weight_share_group = 1;
    bool has_positional_conv = false;
    std::size_t pos_conv_kernel = 128;
    std::size_t pos_conv_groups = 16;
    std::vector<std::size_t> conv_kernels{10, 3, 3, 3, 3, 2, 2};
    std::vector<std::size_t> conv_strides{5, 2, 2, 2, 2, 2, 2};
    std::size_t num_classes = 4;
    std::size_t sample_rate_hz = 16000;
    double clip_seconds = 5.0;

    std::size_t clip_samples() const noexcept;
    std::size_t ffn_hidden() const noexcept { return hidden * ffn_ratio; }

    // Throws ConfigError naming the first violated constraint.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

// Which weight matrices a post-training quantization pass converts to int8.
// `quantize_classifier` covers every task-layer matrix: the feature
// projection, the attention-pooling projection and both classifier layers.
struct QuantPolicy {
    bool quantize_transformer = true;
    bool quantize_classifier = true;
    bool quantize_frontend = false;
    bool quantize_pos_conv = false;

    static QuantPolicy none() { return {false, false, false, false}; }
    bool any() const noexcept { return quantize_transformer || quantize_classifier || quantize_frontend || quantize_pos_conv; }
    QuantPolicy merged(const QuantPolicy& other) const noexcept;

    bool operator==(const QuantPolicy&) const = default;
};

// Named configurations: the six measured variants (small_pos, micro, micro_ws,
// nano_pos, nano, nano_ws), a full-width "standard" model with positional
// convolution, and "pico", a miniature used for fast checks.
std::vector<std::string> preset_names();
ModelConfig preset(std::string_view name);

// key=value lines in a fixed key order; `config_from_text` accepts any order,
// ignores blank lines and '#' comments, and starts from the defaults above.
std::string config_to_text(const ModelConfig& config);
ModelConfig config_from_text(std::string_view text);

std::string policy_to_text(const QuantPolicy& policy);

// Frame count after the frontend's strided convolutions.
std::size_t frontend_frames(const ModelConfig& config, std::size_t samples);

}  // namespace wsi
