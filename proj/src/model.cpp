#include "wsi/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wsi/errors.hpp"

namespace wsi {

std::string_view component_name(Component component) noexcept {
    switch (component) {
        case Component::frontend: return "frontend";
        case Component::positional_conv: return "positional_conv";
        case Component::transformer: return "transformer";
        case Component::task_layers: return "task_layers";
    }
    return "unknown";
}

std::size_t unique_layer_sets(const ModelConfig& config) noexcept {
    const std::size_t group = std::max<std::size_t>(config.weight_share_group, 1);
    return (config.num_layers + group - 1) / group;
}

std::vector<std::size_t> make_tied_layer_map(std::size_t num_layers, std::size_t group) {
    if (group == 0) throw ConfigError("weight_share_group must be >= 1");
    std::vector<std::size_t> map(num_layers);
    for (std::size_t l = 0; l < num_layers; ++l) map[l] = l / group;
    return map;
}

std::string layer_prefix(std::size_t unique_set) { return "encoder.layers." + std::to_string(unique_set) + "."; }

std::vector<TensorSpec> tensor_specs(const ModelConfig& c) {
    std::vector<TensorSpec> specs;
    auto add = [&](std::string name, Shape shape, Component component, bool matrix) {
        specs.push_back({std::move(name), std::move(shape), component, matrix});
    };
    const std::size_t h = c.hidden;
    for (std::size_t i = 0; i < c.conv_kernels.size(); ++i) {
        const std::size_t in = i == 0 ? 1 : c.conv_channels;
        add("frontend.conv." + std::to_string(i) + ".weight", {c.conv_channels, in, c.conv_kernels[i]},
            Component::frontend, true);
    }
    add("frontend.projection.weight", {h, c.conv_channels}, Component::task_layers, true);
    add("frontend.projection.bias", {h}, Component::task_layers, false);
    add("frontend.norm.weight", {h}, Component::task_layers, false);
    add("frontend.norm.bias", {h}, Component::task_layers, false);
    if (c.has_positional_conv) {
        add("pos_conv.weight", {h, h / c.pos_conv_groups, c.pos_conv_kernel}, Component::positional_conv, true);
        add("pos_conv.bias", {h}, Component::positional_conv, false);
    }
    for (std::size_t u = 0; u < unique_layer_sets(c); ++u) {
        const std::string p = layer_prefix(u);
        for (const char* proj : {"query", "key", "value", "output"}) {
            add(p + "attention." + proj + ".weight", {h, h}, Component::transformer, true);
            add(p + "attention." + proj + ".bias", {h}, Component::transformer, false);
        }
        add(p + "attention_norm.weight", {h}, Component::transformer, false);
        add(p + "attention_norm.bias", {h}, Component::transformer, false);
        add(p + "ffn.fc1.weight", {c.ffn_hidden(), h}, Component::transformer, true);
        add(p + "ffn.fc1.bias", {c.ffn_hidden()}, Component::transformer, false);
        add(p + "ffn.fc2.weight", {h, c.ffn_hidden()}, Component::transformer, true);
        add(p + "ffn.fc2.bias", {h}, Component::transformer, false);
        add(p + "ffn_norm.weight", {h}, Component::transformer, false);
        add(p + "ffn_norm.bias", {h}, Component::transformer, false);
    }
    add("head.layer_logits", {c.num_layers + 1}, Component::task_layers, false);
    add("head.pooling.weight", {h, h}, Component::task_layers, true);
    add("head.pooling.bias", {h}, Component::task_layers, false);
    add("head.pooling.vector", {h}, Component::task_layers, false);
    add("head.classifier.fc1.weight", {h, h}, Component::task_layers, true);
    add("head.classifier.fc1.bias", {h}, Component::task_layers, false);
    add("head.classifier.fc2.weight", {c.num_classes, h}, Component::task_layers, true);
    add("head.classifier.fc2.bias", {c.num_classes}, Component::task_layers, false);
    std::sort(specs.begin(), specs.end(), [](const TensorSpec& a, const TensorSpec& b) { return a.name < b.name; });
    return specs;
}

const Shape& param_shape(const Param& p) noexcept {
    return std::visit([](const auto& t) -> const Shape& { return t.shape(); }, p);
}

std::size_t param_elements(const Param& p) noexcept { return shape_elements(param_shape(p)); }

std::size_t param_bytes(const Param& p) noexcept {
    return std::visit([](const auto& t) { return t.bytes(); }, p);
}

bool is_quantized(const Param& p) noexcept { return std::holds_alternative<QuantizedTensor>(p); }

bool params_identical(const Param& a, const Param& b) noexcept {
    if (a.index() != b.index()) return false;
    if (const auto* ta = std::get_if<Tensor>(&a)) return ta->identical(std::get<Tensor>(b));
    return std::get<QuantizedTensor>(a).identical(std::get<QuantizedTensor>(b));
}

bool policy_covers(const QuantPolicy& policy, Component component) noexcept {
    switch (component) {
        case Component::frontend: return policy.quantize_frontend;
        case Component::positional_conv: return policy.quantize_pos_conv;
        case Component::transformer: return policy.quantize_transformer;
        case Component::task_layers: return policy.quantize_classifier;
    }
    return false;
}

Model::Model(ModelConfig config, std::map<std::string, Param> tensors, QuantPolicy applied)
    : config_(std::move(config)), tensors_(std::move(tensors)), policy_(applied) {
    config_.validate();
    tied_layer_map_ = make_tied_layer_map(config_.num_layers, config_.weight_share_group);
    const auto specs = tensor_specs(config_);
    if (specs.size() != tensors_.size()) {
        throw ConfigError("model has " + std::to_string(tensors_.size()) + " tensors, config requires " +
                          std::to_string(specs.size()));
    }
    for (const auto& spec : specs) {
        const auto it = tensors_.find(spec.name);
        if (it == tensors_.end()) throw ConfigError("model is missing tensor '" + spec.name + "'");
        if (param_shape(it->second) != spec.shape) {
            throw ConfigError("tensor '" + spec.name + "' has shape " + shape_to_string(param_shape(it->second)) +
                              ", config requires " + shape_to_string(spec.shape));
        }
        const bool expect_quantized = spec.matrix && policy_covers(policy_, spec.component);
        if (is_quantized(it->second) != expect_quantized) {
            throw ConfigError("tensor '" + spec.name + "' quantization state disagrees with the recorded policy");
        }
    }
}

bool Model::has(std::string_view name) const { return tensors_.find(std::string(name)) != tensors_.end(); }

const Param& Model::param(std::string_view name) const {
    const auto it = tensors_.find(std::string(name));
    if (it == tensors_.end()) throw ConfigError("model has no tensor '" + std::string(name) + "'");
    return it->second;
}

const Tensor& Model::tensor(std::string_view name) const {
    const Param& p = param(name);
    if (const auto* t = std::get_if<Tensor>(&p)) return *t;
    throw QuantizationError("tensor '" + std::string(name) + "' is quantized");
}

kernels::LinearWeights Model::linear(std::string_view prefix) const {
    kernels::LinearWeights layer;
    const Param& w = param(std::string(prefix) + ".weight");
    if (const auto* t = std::get_if<Tensor>(&w)) {
        layer.weight = t;
    } else {
        layer.qweight = &std::get<QuantizedTensor>(w);
    }
    const std::string bias = std::string(prefix) + ".bias";
    if (has(bias)) layer.bias = &tensor(bias);
    return layer;
}

std::size_t Model::weights_bytes() const noexcept {
    std::size_t total = 0;
    for (const auto& [name, p] : tensors_) total += param_bytes(p);
    return total;
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Uniform in [-bound, bound) from a generator keyed by (seed, tensor name).
Tensor uniform_tensor(const Shape& shape, float bound, std::uint64_t seed, std::string_view name) {
    const std::uint64_t key = fnv1a(name);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    std::mt19937_64 rng(seq);
    Tensor t(shape);
    for (float& v : t.data()) {
        const float u = static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f);
        v = (2.0f * u - 1.0f) * bound;
    }
    return t;
}

}  // namespace

Model build_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    std::map<std::string, Param> tensors;
    for (const auto& spec : tensor_specs(config)) {
        Tensor t(spec.shape);
        if (spec.matrix) {
            const float fan_in = static_cast<float>(shape_elements(spec.shape) / spec.shape[0]);
            // Frontend kernels feed GELUs directly, so they get the larger gain.
            const float gain = spec.component == Component::frontend ? 6.0f : 3.0f;
            t = uniform_tensor(spec.shape, std::sqrt(gain / fan_in), seed, spec.name);
        } else if (ends_with(spec.name, "norm.weight")) {
            std::fill(t.data().begin(), t.data().end(), 1.0f);
        } else if (ends_with(spec.name, "norm.bias") || spec.name == "head.layer_logits") {
            // zeros
        } else if (spec.name == "head.pooling.vector") {
            t = uniform_tensor(spec.shape, std::sqrt(3.0f / static_cast<float>(config.hidden)), seed, spec.name);
        } else {
            t = uniform_tensor(spec.shape, 0.02f, seed, spec.name);
        }
        tensors.emplace(spec.name, std::move(t));
    }
    return Model(config, std::move(tensors));
}

void validate_clip(const ModelConfig& config, const ClipInput& clip) {
    if (clip.sample_rate_hz != config.sample_rate_hz) {
        throw InputError("clip sample rate " + std::to_string(clip.sample_rate_hz) + " Hz, model expects " +
                         std::to_string(config.sample_rate_hz) + " Hz");
    }
    if (clip.left.size() != clip.right.size()) {
        throw InputError("clip channels differ in length: " + std::to_string(clip.left.size()) + " vs " +
                         std::to_string(clip.right.size()));
    }
    if (clip.left.size() != config.clip_samples()) {
        throw InputError("clip has " + std::to_string(clip.left.size()) + " samples per channel, model expects " +
                         std::to_string(config.clip_samples()));
    }
}

std::string_view label_name(ClassLabel label) noexcept {
    switch (label) {
        case ClassLabel::backchannel: return "backchannel";
        case ClassLabel::failed_interruption: return "failed_interruption";
        case ClassLabel::interruption: return "interruption";
        case ClassLabel::laughter: return "laughter";
    }
    return "unknown";
}

ClassLabel label_from_name(std::string_view name) {
    for (auto label : {ClassLabel::backchannel, ClassLabel::failed_interruption, ClassLabel::interruption,
                       ClassLabel::laughter}) {
        if (label_name(label) == name) return label;
    }
    throw InputError("unknown class label '" + std::string(name) + "'");
}

Tensor downmix(const ClipInput& clip) {
    if (clip.left.size() != clip.right.size() || clip.left.empty()) {
        throw InputError("downmix needs two non-empty channels of equal length");
    }
    Tensor mono({1, clip.left.size()});
    for (std::size_t i = 0; i < clip.left.size(); ++i) mono[i] = clip.left[i] + clip.right[i];
    return mono;
}

Tensor frontend_forward(const Model& model, const ClipInput& clip) {
    const ModelConfig& c = model.config();
    validate_clip(c, clip);
    Tensor x = downmix(clip);
    for (std::size_t i = 0; i < c.conv_kernels.size(); ++i) {
        const kernels::ConvParams params{c.conv_strides[i], 1, kernels::Padding::none};
        const Param& w = model.param("frontend.conv." + std::to_string(i) + ".weight");
        Tensor y = std::visit([&](const auto& weight) { return kernels::conv1d(x, weight, params); }, w);
        x = kernels::gelu(y);
    }
    const Tensor frames = kernels::transpose(x);
    const Tensor projected = kernels::linear(frames, model.linear("frontend.projection"));
    return kernels::layer_norm(projected, model.tensor("frontend.norm.weight"), model.tensor("frontend.norm.bias"));
}

namespace {

Tensor positional_mix(const Model& model, const Tensor& frames) {
    const ModelConfig& c = model.config();
    const kernels::ConvParams params{1, c.pos_conv_groups, kernels::Padding::same};
    const Tensor channels_first = kernels::transpose(frames);
    const Tensor* bias = &model.tensor("pos_conv.bias");
    Tensor conv = std::visit([&](const auto& w) { return kernels::conv1d(channels_first, w, params, bias); },
                             model.param("pos_conv.weight"));
    return kernels::add(frames, kernels::transpose(kernels::gelu(conv)));
}

Tensor transformer_block(const Model& model, std::size_t unique_set, const Tensor& x) {
    const std::string p = layer_prefix(unique_set);
    const kernels::AttentionWeights attn{model.linear(p + "attention.query"), model.linear(p + "attention.key"),
                                         model.linear(p + "attention.value"), model.linear(p + "attention.output")};
    const Tensor attended = kernels::mhsa(x, attn, model.config().heads);
    const Tensor h = kernels::layer_norm(kernels::add(x, attended), model.tensor(p + "attention_norm.weight"),
                                         model.tensor(p + "attention_norm.bias"));
    const Tensor inner = kernels::gelu(kernels::linear(h, model.linear(p + "ffn.fc1")));
    const Tensor ffn = kernels::linear(inner, model.linear(p + "ffn.fc2"));
    return kernels::layer_norm(kernels::add(h, ffn), model.tensor(p + "ffn_norm.weight"),
                               model.tensor(p + "ffn_norm.bias"));
}

}  // namespace

std::vector<Tensor> encoder_forward(const Model& model, const Tensor& frames) {
    const ModelConfig& c = model.config();
    require_shape(frames, {frames.dim(0), c.hidden}, "encoder input");
    std::vector<Tensor> outputs;
    outputs.reserve(c.num_layers + 1);
    outputs.push_back(c.has_positional_conv ? positional_mix(model, frames) : frames);
    for (std::size_t l = 0; l < c.num_layers; ++l) {
        outputs.push_back(transformer_block(model, model.tied_layer_map()[l], outputs.back()));
    }
    return outputs;
}

HeadOutput head_forward(const Model& model, std::span<const Tensor> layer_outputs) {
    const ModelConfig& c = model.config();
    if (layer_outputs.size() != c.num_layers + 1) {
        throw DimensionError("head expects " + std::to_string(c.num_layers + 1) + " layer outputs, got " +
                             std::to_string(layer_outputs.size()));
    }
    const Shape frame_shape = layer_outputs.front().shape();
    require_shape(layer_outputs.front(), {frame_shape.at(0), c.hidden}, "head input");
    const std::size_t steps = frame_shape[0];

    HeadOutput out;
    out.layer_weights = kernels::softmax(model.tensor("head.layer_logits"), 0);
    Tensor mixed(frame_shape);
    for (std::size_t l = 0; l < layer_outputs.size(); ++l) {
        require_shape(layer_outputs[l], frame_shape, "head layer output");
        const float w = out.layer_weights[l];
        for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] += w * layer_outputs[l][i];
    }

    // Additive attention pooling over time.
    const Tensor projected = kernels::linear(mixed, model.linear("head.pooling"));
    const Tensor& v = model.tensor("head.pooling.vector");
    Tensor scores({steps});
    for (std::size_t t = 0; t < steps; ++t) {
        float s = 0.0f;
        for (std::size_t j = 0; j < c.hidden; ++j) s += v[j] * std::tanh(projected.at(t, j));
        scores[t] = s;
    }
    out.pooling_weights = kernels::softmax(scores, 0);
    out.embedding = Tensor({c.hidden});
    for (std::size_t t = 0; t < steps; ++t) {
        const float a = out.pooling_weights[t];
        for (std::size_t j = 0; j < c.hidden; ++j) out.embedding[j] += a * mixed.at(t, j);
    }

    const Tensor pooled = out.embedding.reshaped({1, c.hidden});
    const Tensor hidden = kernels::gelu(kernels::linear(pooled, model.linear("head.classifier.fc1")));
    out.logits = kernels::linear(hidden, model.linear("head.classifier.fc2")).reshaped({c.num_classes});
    out.probabilities = kernels::softmax(out.logits, 0);
    return out;
}

ClassScores InferenceSession::run(const ClipInput& clip) {
    ClassScores scores;
    arena_.reset_peak();
    {
        ArenaScope scope(arena_);
        const Tensor frames = frontend_forward(*model_, clip);
        const std::vector<Tensor> layers = encoder_forward(*model_, frames);
        const HeadOutput head = head_forward(*model_, layers);
        scores.probabilities.assign(head.probabilities.data().begin(), head.probabilities.data().end());
        scores.logits.assign(head.logits.data().begin(), head.logits.data().end());
        scores.embedding.assign(head.embedding.data().begin(), head.embedding.data().end());
    }
    last_peak_ = arena_.peak_live_bytes();
    scores.label = static_cast<std::size_t>(
        std::max_element(scores.probabilities.begin(), scores.probabilities.end()) - scores.probabilities.begin());
    return scores;
}

ClassScores infer(const Model& model, const ClipInput& clip) {
    InferenceSession session(model);
    return session.run(clip);
}

}  // namespace wsi
