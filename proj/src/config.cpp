#include "wsi/config.hpp"

#include <cmath>
#include <sstream>

#include "text_util.hpp"
#include "wsi/errors.hpp"
#include "wsi/kernels.hpp"

namespace wsi {

std::size_t ModelConfig::clip_samples() const noexcept {
    return static_cast<std::size_t>(std::llround(static_cast<double>(sample_rate_hz) * clip_seconds));
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (conv_channels == 0) fail("conv_channels must be positive");
    if (hidden == 0) fail("hidden must be positive");
    if (heads == 0) fail("heads must be positive");
    if (hidden % heads != 0) {
        fail("hidden " + std::to_string(hidden) + " is not divisible by heads " + std::to_string(heads));
    }
    if (ffn_ratio == 0) fail("ffn_ratio must be positive");
    if (weight_share_group == 0) fail("weight_share_group must be >= 1");
    if (conv_kernels.empty()) fail("conv_kernels must not be empty");
    if (conv_kernels.size() != conv_strides.size()) {
        fail("conv_kernels has " + std::to_string(conv_kernels.size()) + " entries but conv_strides has " +
             std::to_string(conv_strides.size()));
    }
    for (std::size_t i = 0; i < conv_kernels.size(); ++i) {
        if (conv_kernels[i] == 0 || conv_strides[i] == 0) fail("conv kernels and strides must be positive");
    }
    if (has_positional_conv) {
        if (pos_conv_kernel == 0) fail("pos_conv_kernel must be positive");
        if (pos_conv_groups == 0 || hidden % pos_conv_groups != 0) {
            fail("hidden " + std::to_string(hidden) + " is not divisible by pos_conv_groups " +
                 std::to_string(pos_conv_groups));
        }
    }
    if (num_classes < 2) fail("num_classes must be at least 2");
    if (sample_rate_hz == 0) fail("sample_rate_hz must be positive");
    if (!(clip_seconds > 0.0) || !std::isfinite(clip_seconds)) fail("clip_seconds must be positive");
    try {
        (void)frontend_frames(*this, clip_samples());
    } catch (const InputTooShortError&) {
        fail("clip of " + std::to_string(clip_samples()) + " samples is too short for the frontend");
    }
}

QuantPolicy QuantPolicy::merged(const QuantPolicy& other) const noexcept {
    return {quantize_transformer || other.quantize_transformer, quantize_classifier || other.quantize_classifier,
            quantize_frontend || other.quantize_frontend, quantize_pos_conv || other.quantize_pos_conv};
}

std::vector<std::string> preset_names() {
    return {"small_pos", "micro", "micro_ws", "nano_pos", "nano", "nano_ws", "standard", "pico"};
}

ModelConfig preset(std::string_view name) {
    ModelConfig c;
    auto shape = [&](std::size_t conv, std::size_t hidden, bool pos, std::size_t group) {
        c.conv_channels = conv;
        c.hidden = hidden;
        c.heads = hidden / 48;
        c.has_positional_conv = pos;
        c.weight_share_group = group;
    };
    if (name == "small_pos") {
        shape(386, 576, true, 1);
    } else if (name == "micro") {
        shape(256, 384, false, 1);
    } else if (name == "micro_ws") {
        shape(128, 384, false, 3);
    } else if (name == "nano_pos") {
        shape(128, 288, true, 1);
    } else if (name == "nano") {
        shape(128, 288, false, 1);
    } else if (name == "nano_ws") {
        shape(128, 288, false, 3);
    } else if (name == "standard") {
        shape(512, 768, true, 1);
    } else if (name == "pico") {
        shape(16, 48, true, 1);
        c.heads = 2;
        c.num_layers = 3;
        c.pos_conv_kernel = 16;
        c.pos_conv_groups = 4;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    return c;
}

namespace {

std::string join(const std::vector<std::size_t>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ",";
        out += std::to_string(values[i]);
    }
    return out;
}

const char* bool_text(bool v) { return v ? "true" : "false"; }

}  // namespace

std::string config_to_text(const ModelConfig& c) {
    std::ostringstream out;
    out << "conv_channels=" << c.conv_channels << "\n"
        << "hidden=" << c.hidden << "\n"
        << "num_layers=" << c.num_layers << "\n"
        << "heads=" << c.heads << "\n"
        << "ffn_ratio=" << c.ffn_ratio << "\n"
        << "weight_share_group=" << c.weight_share_group << "\n"
        << "has_positional_conv=" << bool_text(c.has_positional_conv) << "\n"
        << "pos_conv_kernel=" << c.pos_conv_kernel << "\n"
        << "pos_conv_groups=" << c.pos_conv_groups << "\n"
        << "conv_kernels=" << join(c.conv_kernels) << "\n"
        << "conv_strides=" << join(c.conv_strides) << "\n"
        << "num_classes=" << c.num_classes << "\n"
        << "sample_rate_hz=" << c.sample_rate_hz << "\n"
        << "clip_seconds=" << text::format_double(c.clip_seconds) << "\n";
    return out.str();
}

ModelConfig config_from_text(std::string_view body) {
    ModelConfig c;
    for (const auto& [key, value] : text::parse_key_values(body)) {
        if (key == "preset") {
            c = preset(value);
        } else if (key == "conv_channels") {
            c.conv_channels = text::to_size(value, key);
        } else if (key == "hidden") {
            c.hidden = text::to_size(value, key);
        } else if (key == "num_layers") {
            c.num_layers = text::to_size(value, key);
        } else if (key == "heads") {
            c.heads = text::to_size(value, key);
        } else if (key == "ffn_ratio") {
            c.ffn_ratio = text::to_size(value, key);
        } else if (key == "weight_share_group") {
            c.weight_share_group = text::to_size(value, key);
        } else if (key == "has_positional_conv") {
            c.has_positional_conv = text::to_bool(value, key);
        } else if (key == "pos_conv_kernel") {
            c.pos_conv_kernel = text::to_size(value, key);
        } else if (key == "pos_conv_groups") {
            c.pos_conv_groups = text::to_size(value, key);
        } else if (key == "conv_kernels") {
            c.conv_kernels = text::to_size_list(value, key);
        } else if (key == "conv_strides") {
            c.conv_strides = text::to_size_list(value, key);
        } else if (key == "num_classes") {
            c.num_classes = text::to_size(value, key);
        } else if (key == "sample_rate_hz") {
            c.sample_rate_hz = text::to_size(value, key);
        } else if (key == "clip_seconds") {
            c.clip_seconds = text::to_double(value, key);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

std::string policy_to_text(const QuantPolicy& p) {
    std::ostringstream out;
    out << "quantize_transformer=" << bool_text(p.quantize_transformer) << "\n"
        << "quantize_classifier=" << bool_text(p.quantize_classifier) << "\n"
        << "quantize_frontend=" << bool_text(p.quantize_frontend) << "\n"
        << "quantize_pos_conv=" << bool_text(p.quantize_pos_conv) << "\n";
    return out.str();
}

std::size_t frontend_frames(const ModelConfig& config, std::size_t samples) {
    std::size_t length = samples;
    for (std::size_t i = 0; i < config.conv_kernels.size(); ++i) {
        length = kernels::conv1d_output_length(length, config.conv_kernels[i], config.conv_strides[i],
                                               kernels::Padding::none);
    }
    return length;
}

}  // namespace wsi
