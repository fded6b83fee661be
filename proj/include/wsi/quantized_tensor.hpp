#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wsi/tensor.hpp"

namespace wsi {

// Symmetric int8 weights with one float32 scale per output channel (the
// leading dimension). Zero point is always 0 and codes stay in [-127, 127].
class QuantizedTensor {
public:
    QuantizedTensor() = default;
    QuantizedTensor(Shape shape, std::vector<std::int8_t> values, std::vector<float> scales);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t channels() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
    std::size_t channel_size() const noexcept { return channels() == 0 ? 0 : values_.size() / channels(); }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const std::int8_t> values() const noexcept { return values_; }
    std::span<const float> scales() const noexcept { return scales_; }
    const std::int8_t* channel(std::size_t c) const noexcept { return values_.data() + c * channel_size(); }

    // Bytes of the int8 payload plus the scale table.
    std::size_t bytes() const noexcept { return values_.size() + scales_.size() * sizeof(float); }

    bool identical(const QuantizedTensor& other) const noexcept;

private:
    Shape shape_;
    std::vector<std::int8_t> values_;
    std::vector<float> scales_;
};

// Round half away from zero, clamp to [-127, 127].
std::int8_t quantize_value(float value, float scale) noexcept;

// Scale for a channel whose largest magnitude is `max_abs`; 1 for an all-zero channel.
float symmetric_scale(float max_abs) noexcept;

QuantizedTensor quantize_tensor(const Tensor& weights);
Tensor dequantize(const QuantizedTensor& q);

// x[M x K] times the transpose of w[N x K]. Each row of x is quantized on the
// fly with its own scale; products accumulate in int32.
Tensor qmatmul(const Tensor& x, const QuantizedTensor& w);

}  // namespace wsi
