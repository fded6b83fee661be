#pragma once

#include <cstddef>
#include <vector>

#include "wsi/quantized_tensor.hpp"
#include "wsi/tensor.hpp"

// Numeric building blocks shared by the float32 and int8 forward paths.
// All kernels are pure: they read their inputs, allocate the output from the
// calling thread's current resource and touch no other state. Shapes must
// match exactly; nothing broadcasts.
namespace wsi::kernels {

// a[M x K] times b[K x N].
Tensor matmul(const Tensor& a, const Tensor& b);

// Elementwise sum of two tensors with identical shapes.
Tensor add(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& x);

enum class Padding { none, same };

struct ConvParams {
    std::size_t stride = 1;
    std::size_t groups = 1;
    Padding padding = Padding::none;
};

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride, Padding padding);

// Cross-correlation of x[C_in x T] with w[C_out x C_in/groups x K].
// `same` padding puts K/2 zeros on the left and K-1-K/2 on the right.
Tensor conv1d(const Tensor& x, const Tensor& w, const ConvParams& params, const Tensor* bias = nullptr);
Tensor conv1d(const Tensor& x, const QuantizedTensor& w, const ConvParams& params, const Tensor* bias = nullptr);

// Normalizes over the last dimension.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps = 1e-5f);

// x * Phi(x) with the exact Gaussian CDF.
Tensor gelu(const Tensor& x);

Tensor softmax(const Tensor& x, std::size_t axis);

// A dense layer y = x W^T + b whose weight is either float32 or int8.
// Exactly one of `weight` / `qweight` is set; `bias` is optional.
struct LinearWeights {
    const Tensor* weight = nullptr;
    const QuantizedTensor* qweight = nullptr;
    const Tensor* bias = nullptr;

    std::size_t out_features() const;
    std::size_t in_features() const;
};

// x[M x in] -> [M x out].
Tensor linear(const Tensor& x, const LinearWeights& layer);

struct AttentionWeights {
    LinearWeights query;
    LinearWeights key;
    LinearWeights value;
    LinearWeights output;
};

// Multi-head scaled dot-product self-attention over x[T x H]. When
// `head_probabilities` is given it receives one [T x T] matrix per head.
Tensor mhsa(const Tensor& x, const AttentionWeights& weights, std::size_t heads,
            std::vector<Tensor>* head_probabilities = nullptr);

}  // namespace wsi::kernels
