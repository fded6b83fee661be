#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "wsi/config.hpp"
#include "wsi/model.hpp"

namespace wsi {

// Per-component values indexed by Component.
template <typename T>
struct ByComponent {
    std::array<T, 4> values{};

    T& operator[](Component c) noexcept { return values[static_cast<std::size_t>(c)]; }
    const T& operator[](Component c) const noexcept { return values[static_cast<std::size_t>(c)]; }
    T total() const noexcept {
        T sum{};
        for (const T& v : values) sum += v;
        return sum;
    }
};

// Static cost accounting for one model. MACs cover a single clip; softmax,
// normalization, GELU and tanh count as zero.
struct AnalysisReport {
    std::string model_name;
    ModelConfig config;
    QuantPolicy policy;  // the policy behind bytes_quantized and the breakdown
    double clip_seconds = 5.0;
    std::size_t sample_rate_hz = 16000;
    std::size_t frames = 0;

    ByComponent<std::uint64_t> params_by_component;
    ByComponent<std::uint64_t> macs_by_component;
    ByComponent<std::uint64_t> bytes_by_component;  // payload bytes after quantization
    ByComponent<double> percent_by_component;

    std::uint64_t total_params = 0;
    std::uint64_t total_macs = 0;
    std::uint64_t bytes_float32 = 0;    // full file size, no quantization
    std::uint64_t bytes_quantized = 0;  // full file size under `policy`
};

ByComponent<std::uint64_t> count_params(const ModelConfig& config);
ByComponent<std::uint64_t> count_params(const Model& model);

ByComponent<std::uint64_t> count_macs(const ModelConfig& config, double clip_seconds, std::size_t sample_rate_hz);
ByComponent<std::uint64_t> count_macs(const Model& model, double clip_seconds, std::size_t sample_rate_hz);

struct SerializedSize {
    std::uint64_t float32 = 0;
    std::uint64_t quantized = 0;
};

// File sizes of the model as stored in float32 and after applying `policy`
// on top of whatever quantization the model already carries.
SerializedSize serialized_size(const ModelConfig& config, const QuantPolicy& policy);
SerializedSize serialized_size(const Model& model, const QuantPolicy& policy);

// Post-quantization payload share of each component, in percent.
ByComponent<double> component_breakdown(const ModelConfig& config, const QuantPolicy& policy);
ByComponent<double> component_breakdown(const Model& model, const QuantPolicy& policy);

AnalysisReport analyze(const ModelConfig& config, const QuantPolicy& policy, double clip_seconds = 5.0,
                       std::size_t sample_rate_hz = 16000);
AnalysisReport analyze(const Model& model, const QuantPolicy& policy, double clip_seconds = 5.0,
                       std::size_t sample_rate_hz = 16000);

std::string format_report_table(const AnalysisReport& report);
// One `component.metric = value` line per figure.
std::string format_report_kv(const AnalysisReport& report);

struct MemoryTrace {
    std::size_t peak_live_bytes = 0;  // activation high-water mark of one inference
    std::size_t weights_bytes = 0;    // resident model weights
    std::size_t reserved_bytes = 0;   // arena footprint held from the system
};

MemoryTrace trace_memory(const Model& model, const ClipInput& clip);

}  // namespace wsi
