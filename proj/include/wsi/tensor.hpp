#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory_resource>
#include <span>
#include <string>
#include <vector>

namespace wsi {

using Shape = std::vector<std::size_t>;

std::string shape_to_string(const Shape& shape);
std::size_t shape_elements(const Shape& shape);

// Dense row-major float32 array. Storage comes from the thread's current
// resource (see ArenaScope), so activations created during an inference are
// accounted to that session's arena.
class Tensor {
public:
    Tensor();
    explicit Tensor(Shape shape);
    Tensor(Shape shape, std::span<const float> values);
    Tensor(Shape shape, std::initializer_list<float> values);

    Tensor(const Tensor& other);
    Tensor(Tensor&& other) noexcept = default;
    Tensor& operator=(const Tensor& other);
    Tensor& operator=(Tensor&& other) noexcept = default;

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t size() const noexcept { return data_.size(); }
    std::size_t bytes() const noexcept { return data_.size() * sizeof(float); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<float> data() noexcept { return {data_.data(), data_.size()}; }
    std::span<const float> data() const noexcept { return {data_.data(), data_.size()}; }

    float& operator[](std::size_t i) noexcept { return data_[i]; }
    float operator[](std::size_t i) const noexcept { return data_[i]; }

    // 2-D element access.
    float& at(std::size_t row, std::size_t col) noexcept { return data_[row * shape_[1] + col]; }
    float at(std::size_t row, std::size_t col) const noexcept { return data_[row * shape_[1] + col]; }

    // Pointer to the start of row `row` of a 2-D tensor.
    float* row(std::size_t r) noexcept { return data_.data() + r * shape_.back(); }
    const float* row(std::size_t r) const noexcept { return data_.data() + r * shape_.back(); }

    Tensor reshaped(Shape shape) const;

    // Same shape and bit-identical values.
    bool identical(const Tensor& other) const noexcept;

private:
    Shape shape_;
    std::pmr::vector<float> data_;
};

// Throws DimensionError unless `t` has exactly `expected` shape.
void require_shape(const Tensor& t, const Shape& expected, const char* what);

// Throws NumericError if any value is NaN or infinite.
void require_finite(const Tensor& t, const char* what);

float max_abs_difference(const Tensor& a, const Tensor& b);

}  // namespace wsi
