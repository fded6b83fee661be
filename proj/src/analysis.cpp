#include "wsi/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "wsi/model_file.hpp"

namespace wsi {

ByComponent<std::uint64_t> count_params(const ModelConfig& config) {
    ByComponent<std::uint64_t> counts;
    for (const auto& spec : tensor_specs(config)) counts[spec.component] += shape_elements(spec.shape);
    return counts;
}

ByComponent<std::uint64_t> count_params(const Model& model) {
    ByComponent<std::uint64_t> counts;
    const auto specs = tensor_specs(model.config());
    for (const auto& spec : specs) counts[spec.component] += param_elements(model.param(spec.name));
    return counts;
}

ByComponent<std::uint64_t> count_macs(const ModelConfig& c, double clip_seconds, std::size_t sample_rate_hz) {
    ByComponent<std::uint64_t> macs;
    const auto samples = static_cast<std::uint64_t>(std::llround(clip_seconds * static_cast<double>(sample_rate_hz)));
    std::uint64_t length = samples;
    std::uint64_t in_channels = 1;
    for (std::size_t i = 0; i < c.conv_kernels.size(); ++i) {
        length = kernels::conv1d_output_length(length, c.conv_kernels[i], c.conv_strides[i], kernels::Padding::none);
        macs[Component::frontend] += length * c.conv_channels * in_channels * c.conv_kernels[i];
        in_channels = c.conv_channels;
    }
    const std::uint64_t t = length;
    const std::uint64_t h = c.hidden;
    const std::uint64_t ffn = c.ffn_hidden();

    if (c.has_positional_conv) {
        macs[Component::positional_conv] = t * h * (h / c.pos_conv_groups) * c.pos_conv_kernel;
    }

    // Q, K, V and output projections, scores plus context, then the FFN.
    const std::uint64_t per_layer = 4 * t * h * h + 2 * t * t * h + 2 * t * h * ffn;
    macs[Component::transformer] = per_layer * c.num_layers;

    std::uint64_t task = t * c.conv_channels * h;         // feature projection
    task += (c.num_layers + 1) * t * h;                   // layer-weighted sum
    task += t * h * h + t * h;                            // pooling projection and score vector
    task += t * h;                                        // pooled sum
    task += h * h + c.num_classes * h;                    // classifier
    macs[Component::task_layers] = task;
    return macs;
}

ByComponent<std::uint64_t> count_macs(const Model& model, double clip_seconds, std::size_t sample_rate_hz) {
    return count_macs(model.config(), clip_seconds, sample_rate_hz);
}

SerializedSize serialized_size(const ModelConfig& config, const QuantPolicy& policy) {
    return {encoded_size(config, QuantPolicy::none()), encoded_size(config, policy)};
}

SerializedSize serialized_size(const Model& model, const QuantPolicy& policy) {
    return {encoded_size(model.config(), QuantPolicy::none()),
            encoded_size(model.config(), model.quant_policy().merged(policy))};
}

namespace {

ByComponent<std::uint64_t> payload_bytes(const ModelConfig& config, const QuantPolicy& policy) {
    ByComponent<std::uint64_t> bytes;
    for (const auto& spec : tensor_specs(config)) {
        const std::uint64_t n = shape_elements(spec.shape);
        const bool int8 = spec.matrix && policy_covers(policy, spec.component);
        bytes[spec.component] += int8 ? n + 4 * spec.shape[0] : 4 * n;
    }
    return bytes;
}

ByComponent<double> shares(const ByComponent<std::uint64_t>& bytes) {
    ByComponent<double> percent;
    const double total = static_cast<double>(bytes.total());
    for (Component c : kComponents) percent[c] = total > 0 ? 100.0 * static_cast<double>(bytes[c]) / total : 0.0;
    return percent;
}

}  // namespace

ByComponent<double> component_breakdown(const ModelConfig& config, const QuantPolicy& policy) {
    return shares(payload_bytes(config, policy));
}

ByComponent<double> component_breakdown(const Model& model, const QuantPolicy& policy) {
    return component_breakdown(model.config(), model.quant_policy().merged(policy));
}

AnalysisReport analyze(const ModelConfig& config, const QuantPolicy& policy, double clip_seconds,
                       std::size_t sample_rate_hz) {
    config.validate();
    AnalysisReport r;
    r.config = config;
    r.policy = policy;
    r.clip_seconds = clip_seconds;
    r.sample_rate_hz = sample_rate_hz;
    r.frames = frontend_frames(config, static_cast<std::size_t>(std::llround(clip_seconds * static_cast<double>(sample_rate_hz))));
    r.params_by_component = count_params(config);
    r.total_params = r.params_by_component.total();
    r.macs_by_component = count_macs(config, clip_seconds, sample_rate_hz);
    r.total_macs = r.macs_by_component.total();
    r.bytes_by_component = payload_bytes(config, policy);
    r.percent_by_component = shares(r.bytes_by_component);
    const SerializedSize size = serialized_size(config, policy);
    r.bytes_float32 = size.float32;
    r.bytes_quantized = size.quantized;
    return r;
}

AnalysisReport analyze(const Model& model, const QuantPolicy& policy, double clip_seconds,
                       std::size_t sample_rate_hz) {
    AnalysisReport r = analyze(model.config(), model.quant_policy().merged(policy), clip_seconds, sample_rate_hz);
    r.params_by_component = count_params(model);
    r.total_params = r.params_by_component.total();
    return r;
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string policy_summary(const QuantPolicy& p) {
    std::string out;
    auto add = [&](bool on, const char* name) {
        if (!on) return;
        if (!out.empty()) out += ",";
        out += name;
    };
    add(p.quantize_frontend, "frontend");
    add(p.quantize_pos_conv, "positional_conv");
    add(p.quantize_transformer, "transformer");
    add(p.quantize_classifier, "task_layers");
    return out.empty() ? "none" : out;
}

}  // namespace

std::string format_report_table(const AnalysisReport& r) {
    std::ostringstream out;
    char line[200];
    out << "model: " << (r.model_name.empty() ? "(unnamed)" : r.model_name) << "  conv_ch=" << r.config.conv_channels
        << " hidden=" << r.config.hidden << " layers=" << r.config.num_layers
        << " share_group=" << r.config.weight_share_group
        << " pos_conv=" << (r.config.has_positional_conv ? "yes" : "no") << "\n";
    out << "clip: " << fixed(r.clip_seconds, 2) << " s @ " << r.sample_rate_hz << " Hz -> " << r.frames
        << " frames; MACs count matmul/conv only (norm, softmax, GELU = 0)\n";
    out << "quantized: " << policy_summary(r.policy) << "\n\n";
    std::snprintf(line, sizeof line, "%-16s %14s %10s %10s %14s %8s\n", "component", "params", "M", "GMACs",
                  "bytes(q)", "share%");
    out << line;
    for (Component c : kComponents) {
        std::snprintf(line, sizeof line, "%-16s %14llu %10.3f %10.3f %14llu %8.2f\n",
                      std::string(component_name(c)).c_str(),
                      static_cast<unsigned long long>(r.params_by_component[c]),
                      static_cast<double>(r.params_by_component[c]) / 1e6,
                      static_cast<double>(r.macs_by_component[c]) / 1e9,
                      static_cast<unsigned long long>(r.bytes_by_component[c]), r.percent_by_component[c]);
        out << line;
    }
    std::snprintf(line, sizeof line, "%-16s %14llu %10.3f %10.3f %14llu %8.2f\n", "total",
                  static_cast<unsigned long long>(r.total_params), static_cast<double>(r.total_params) / 1e6,
                  static_cast<double>(r.total_macs) / 1e9,
                  static_cast<unsigned long long>(r.bytes_by_component.total()), r.percent_by_component.total());
    out << line << "\n";
    std::snprintf(line, sizeof line, "file size float32   %14llu bytes (%.2f MB)\n",
                  static_cast<unsigned long long>(r.bytes_float32), static_cast<double>(r.bytes_float32) / 1e6);
    out << line;
    std::snprintf(line, sizeof line, "file size quantized %14llu bytes (%.2f MB)\n",
                  static_cast<unsigned long long>(r.bytes_quantized), static_cast<double>(r.bytes_quantized) / 1e6);
    out << line;
    return out.str();
}

std::string format_report_kv(const AnalysisReport& r) {
    std::ostringstream out;
    out << "model.name = " << (r.model_name.empty() ? "unnamed" : r.model_name) << "\n";
    out << "model.frames = " << r.frames << "\n";
    out << "model.quantized = " << policy_summary(r.policy) << "\n";
    for (Component c : kComponents) {
        const std::string name(component_name(c));
        out << name << ".params = " << r.params_by_component[c] << "\n";
        out << name << ".macs = " << r.macs_by_component[c] << "\n";
        out << name << ".bytes = " << r.bytes_by_component[c] << "\n";
        out << name << ".percent = " << fixed(r.percent_by_component[c], 4) << "\n";
    }
    out << "total.params = " << r.total_params << "\n";
    out << "total.macs = " << r.total_macs << "\n";
    out << "size.float32_bytes = " << r.bytes_float32 << "\n";
    out << "size.quantized_bytes = " << r.bytes_quantized << "\n";
    return out.str();
}

MemoryTrace trace_memory(const Model& model, const ClipInput& clip) {
    InferenceSession session(model);
    session.run(clip);
    return {session.last_peak_bytes(), model.weights_bytes(), session.arena().reserved_bytes()};
}

}  // namespace wsi
