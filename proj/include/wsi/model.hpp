#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wsi/arena.hpp"
#include "wsi/config.hpp"
#include "wsi/kernels.hpp"
#include "wsi/quantized_tensor.hpp"
#include "wsi/tensor.hpp"

namespace wsi {

// Size-accounting buckets: CNN frontend, positional convolution, transformer
// stack, and task layers (projection, layer weighting, pooling, classifier).
enum class Component { frontend, positional_conv, transformer, task_layers };

inline constexpr Component kComponents[] = {Component::frontend, Component::positional_conv,
                                            Component::transformer, Component::task_layers};

std::string_view component_name(Component component) noexcept;

struct TensorSpec {
    std::string name;
    Shape shape;
    Component component;
    bool matrix;  // weight matrix or conv kernel, eligible for int8
};

// Every tensor a model with this config owns, sorted by name. Tied layers
// contribute one set of `encoder.layers.<k>.*` tensors per unique set.
std::vector<TensorSpec> tensor_specs(const ModelConfig& config);

bool policy_covers(const QuantPolicy& policy, Component component) noexcept;

std::size_t unique_layer_sets(const ModelConfig& config) noexcept;

// layer -> unique weight set, floor(layer / group).
std::vector<std::size_t> make_tied_layer_map(std::size_t num_layers, std::size_t group);

std::string layer_prefix(std::size_t unique_set);

using Param = std::variant<Tensor, QuantizedTensor>;

const Shape& param_shape(const Param& p) noexcept;
std::size_t param_elements(const Param& p) noexcept;
std::size_t param_bytes(const Param& p) noexcept;
bool is_quantized(const Param& p) noexcept;
bool params_identical(const Param& a, const Param& b) noexcept;

// Immutable weights plus the topology implied by the config. Construction
// checks the tensor set, every shape and the quantization state against the
// config and applied policy.
class Model {
public:
    Model(ModelConfig config, std::map<std::string, Param> tensors, QuantPolicy applied = QuantPolicy::none());

    const ModelConfig& config() const noexcept { return config_; }
    const std::map<std::string, Param>& tensors() const noexcept { return tensors_; }
    const std::vector<std::size_t>& tied_layer_map() const noexcept { return tied_layer_map_; }
    std::size_t unique_layer_count() const noexcept { return unique_layer_sets(config_); }
    const QuantPolicy& quant_policy() const noexcept { return policy_; }

    bool has(std::string_view name) const;
    const Param& param(std::string_view name) const;
    // Float tensor by name; throws if missing or quantized.
    const Tensor& tensor(std::string_view name) const;
    kernels::LinearWeights linear(std::string_view prefix) const;

    // Resident bytes of all weights.
    std::size_t weights_bytes() const noexcept;

private:
    ModelConfig config_;
    std::map<std::string, Param> tensors_;
    std::vector<std::size_t> tied_layer_map_;
    QuantPolicy policy_;
};

// Deterministic weights for (config, seed). Layer-sum logits start at zero.
Model build_model(const ModelConfig& config, std::uint64_t seed);

// One clip: left holds everyone else, right the potential interrupter.
struct ClipInput {
    std::vector<float> left;
    std::vector<float> right;
    std::size_t sample_rate_hz = 16000;
};

// Throws InputError unless both channels have config.clip_samples() samples
// at the configured rate.
void validate_clip(const ModelConfig& config, const ClipInput& clip);

enum class ClassLabel : std::uint8_t { backchannel = 0, failed_interruption = 1, interruption = 2, laughter = 3 };

std::string_view label_name(ClassLabel label) noexcept;
ClassLabel label_from_name(std::string_view name);

// Stereo to the single frontend input channel: left + right, shape [1 x N].
Tensor downmix(const ClipInput& clip);

// [T_frames x hidden].
Tensor frontend_forward(const Model& model, const ClipInput& clip);

// num_layers + 1 tensors: the (position-mixed) input followed by each block.
std::vector<Tensor> encoder_forward(const Model& model, const Tensor& frames);

struct HeadOutput {
    Tensor probabilities;    // [num_classes]
    Tensor logits;           // [num_classes]
    Tensor embedding;        // [hidden], attention-pooled
    Tensor layer_weights;    // [num_layers + 1]
    Tensor pooling_weights;  // [T]
};

HeadOutput head_forward(const Model& model, std::span<const Tensor> layer_outputs);

struct ClassScores {
    std::vector<float> probabilities;
    std::vector<float> logits;
    std::vector<float> embedding;
    std::size_t label = 0;
};

// Runs inferences with a private activation arena that is reused across
// calls. One session per thread; the model may be shared.
class InferenceSession {
public:
    explicit InferenceSession(const Model& model) : model_(&model) {}

    ClassScores run(const ClipInput& clip);

    // High-water activation bytes of the most recent run.
    std::size_t last_peak_bytes() const noexcept { return last_peak_; }
    const Arena& arena() const noexcept { return arena_; }

private:
    const Model* model_;
    Arena arena_;
    std::size_t last_peak_ = 0;
};

ClassScores infer(const Model& model, const ClipInput& clip);

}  // namespace wsi
