#include "wsi/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "wsi/arena.hpp"
#include "wsi/errors.hpp"

namespace wsi {

std::string shape_to_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

std::size_t shape_elements(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

namespace {
void check_dims(const Shape& shape) {
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
    }
}
}  // namespace

Tensor::Tensor() : data_(current_resource()) {}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(current_resource()) {
    check_dims(shape_);
    data_.assign(shape_elements(shape_), 0.0f);
}

Tensor::Tensor(Shape shape, std::span<const float> values)
    : shape_(std::move(shape)), data_(current_resource()) {
    check_dims(shape_);
    if (values.size() != shape_elements(shape_)) {
        throw DimensionError("tensor of shape " + shape_to_string(shape_) + " needs " +
                             std::to_string(shape_elements(shape_)) + " values, got " +
                             std::to_string(values.size()));
    }
    data_.assign(values.begin(), values.end());
}

Tensor::Tensor(Shape shape, std::initializer_list<float> values)
    : Tensor(std::move(shape), std::span<const float>(values.begin(), values.size())) {}

Tensor::Tensor(const Tensor& other) : shape_(other.shape_), data_(other.data_, current_resource()) {}

Tensor& Tensor::operator=(const Tensor& other) {
    if (this != &other) {
        shape_ = other.shape_;
        data_.assign(other.data_.begin(), other.data_.end());
    }
    return *this;
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) {
        throw DimensionError("axis " + std::to_string(axis) + " out of range for shape " +
                             shape_to_string(shape_));
    }
    return shape_[axis];
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_elements(shape) != size()) {
        throw DimensionError("cannot reshape " + shape_to_string(shape_) + " to " + shape_to_string(shape));
    }
    return Tensor(std::move(shape), data());
}

bool Tensor::identical(const Tensor& other) const noexcept {
    return shape_ == other.shape_ &&
           std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
    if (t.shape() != expected) {
        throw DimensionError(std::string(what) + ": expected shape " + shape_to_string(expected) +
                             ", got " + shape_to_string(t.shape()));
    }
}

void require_finite(const Tensor& t, const char* what) {
    for (float v : t.data()) {
        if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value");
    }
}

float max_abs_difference(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("shape mismatch " + shape_to_string(a.shape()) + " vs " +
                             shape_to_string(b.shape()));
    }
    float worst = 0.0f;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
    return worst;
}

}  // namespace wsi
