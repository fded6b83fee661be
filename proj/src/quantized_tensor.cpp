#include "wsi/quantized_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gemm.hpp"
#include "wsi/errors.hpp"

namespace wsi {

QuantizedTensor::QuantizedTensor(Shape shape, std::vector<std::int8_t> values, std::vector<float> scales)
    : shape_(std::move(shape)), values_(std::move(values)), scales_(std::move(scales)) {
    if (shape_.size() < 2) {
        throw DimensionError("quantized tensor needs a leading channel dimension, got " + shape_to_string(shape_));
    }
    if (values_.size() != shape_elements(shape_)) {
        throw DimensionError("quantized payload size " + std::to_string(values_.size()) +
                             " does not match shape " + shape_to_string(shape_));
    }
    if (scales_.size() != shape_[0]) {
        throw DimensionError("expected " + std::to_string(shape_[0]) + " channel scales, got " +
                             std::to_string(scales_.size()));
    }
    for (std::int8_t v : values_) {
        if (v == -128) throw QuantizationError("int8 code -128 is outside the symmetric range");
    }
    for (float s : scales_) {
        if (!(s > 0.0f) || !std::isfinite(s)) throw QuantizationError("channel scales must be positive and finite");
    }
}

bool QuantizedTensor::identical(const QuantizedTensor& other) const noexcept {
    return shape_ == other.shape_ && values_ == other.values_ &&
           std::memcmp(scales_.data(), other.scales_.data(), scales_.size() * sizeof(float)) == 0 &&
           scales_.size() == other.scales_.size();
}

std::int8_t quantize_value(float value, float scale) noexcept {
    // The ratio is formed in double so the rounding decision sees the exact
    // quotient of the two float operands.
    double q = std::round(static_cast<double>(value) / static_cast<double>(scale));
    q = std::clamp(q, -127.0, 127.0);
    return static_cast<std::int8_t>(q);
}

float symmetric_scale(float max_abs) noexcept { return max_abs > 0.0f ? max_abs / 127.0f : 1.0f; }

QuantizedTensor quantize_tensor(const Tensor& weights) {
    if (weights.rank() < 2) {
        throw DimensionError("per-channel quantization needs rank >= 2, got " + shape_to_string(weights.shape()));
    }
    require_finite(weights, "quantize_tensor");
    const std::size_t channels = weights.dim(0);
    const std::size_t per_channel = weights.size() / channels;
    std::vector<std::int8_t> values(weights.size());
    std::vector<float> scales(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        const float* src = weights.data().data() + c * per_channel;
        float max_abs = 0.0f;
        for (std::size_t i = 0; i < per_channel; ++i) max_abs = std::max(max_abs, std::fabs(src[i]));
        const float scale = symmetric_scale(max_abs);
        scales[c] = scale;
        for (std::size_t i = 0; i < per_channel; ++i) values[c * per_channel + i] = quantize_value(src[i], scale);
    }
    return QuantizedTensor(weights.shape(), std::move(values), std::move(scales));
}

Tensor dequantize(const QuantizedTensor& q) {
    Tensor out(q.shape());
    const std::size_t per_channel = q.channel_size();
    for (std::size_t c = 0; c < q.channels(); ++c) {
        const float scale = q.scales()[c];
        const std::int8_t* src = q.channel(c);
        float* dst = out.data().data() + c * per_channel;
        for (std::size_t i = 0; i < per_channel; ++i) dst[i] = static_cast<float>(src[i]) * scale;
    }
    return out;
}

namespace detail {

namespace {
std::int32_t dot_i8(const std::int8_t* __restrict a, const std::int8_t* __restrict b, std::size_t n) noexcept {
    std::int32_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<std::int32_t>(a[i]) * static_cast<std::int32_t>(b[i]);
    return acc;
}
}  // namespace

void qgemm_rows(const float* x, std::size_t rows, std::size_t inner, const std::int8_t* w, const float* scales,
                std::size_t outputs, float* out, std::size_t ldo) {
    std::vector<std::int8_t> row_codes(inner);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* src = x + r * inner;
        float* dst = out + r * ldo;
        float max_abs = 0.0f;
        for (std::size_t k = 0; k < inner; ++k) max_abs = std::max(max_abs, std::fabs(src[k]));
        if (max_abs == 0.0f) {
            std::fill(dst, dst + outputs, 0.0f);
            continue;
        }
        const float row_scale = symmetric_scale(max_abs);
        for (std::size_t k = 0; k < inner; ++k) row_codes[k] = quantize_value(src[k], row_scale);
        for (std::size_t j = 0; j < outputs; ++j) {
            const std::int32_t acc = dot_i8(row_codes.data(), w + j * inner, inner);
            dst[j] = static_cast<float>(acc) * (row_scale * scales[j]);
        }
    }
}

}  // namespace detail

Tensor qmatmul(const Tensor& x, const QuantizedTensor& w) {
    if (x.rank() != 2) throw DimensionError("qmatmul expects a 2-D input, got " + shape_to_string(x.shape()));
    const std::size_t rows = x.dim(0);
    const std::size_t inner = x.dim(1);
    if (w.channel_size() != inner) {
        throw DimensionError("qmatmul shape mismatch: input " + shape_to_string(x.shape()) + " vs weights " +
                             shape_to_string(w.shape()));
    }
    require_finite(x, "qmatmul input");
    Tensor out({rows, w.channels()});
    detail::qgemm_rows(x.data().data(), rows, inner, w.values().data(), w.scales().data(), w.channels(),
                       out.data().data(), w.channels());
    return out;
}

}  // namespace wsi
