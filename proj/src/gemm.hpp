#pragma once

#include <cstddef>
#include <cstdint>

namespace wsi::detail {

// c[M x N] = a[M x K] * b[K x N], all row-major with tight strides.
void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n) noexcept;

// out[r * ldo + j] = dynamic-int8(x row r) . w row j, rescaled, for r < rows, j < outputs.
// Inputs must be finite.
void qgemm_rows(const float* x, std::size_t rows, std::size_t inner, const std::int8_t* w, const float* scales,
                std::size_t outputs, float* out, std::size_t ldo);

}  // namespace wsi::detail
