#include "wsi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gemm.hpp"
#include "wsi/errors.hpp"

namespace wsi::detail {

void gemm(const float* a, const float* b, float* c, std::size_t m, std::size_t k, std::size_t n) noexcept {
    std::fill(c, c + m * n, 0.0f);
    // Panels of b stay cache resident while four rows of c are updated.
    constexpr std::size_t kPanel = 128;
    for (std::size_t k0 = 0; k0 < k; k0 += kPanel) {
        const std::size_t k1 = std::min(k, k0 + kPanel);
        std::size_t i = 0;
        for (; i + 4 <= m; i += 4) {
            float* __restrict c0 = c + i * n;
            float* __restrict c1 = c0 + n;
            float* __restrict c2 = c1 + n;
            float* __restrict c3 = c2 + n;
            for (std::size_t p = k0; p < k1; ++p) {
                const float* __restrict br = b + p * n;
                const float a0 = a[i * k + p];
                const float a1 = a[(i + 1) * k + p];
                const float a2 = a[(i + 2) * k + p];
                const float a3 = a[(i + 3) * k + p];
                for (std::size_t j = 0; j < n; ++j) {
                    const float bv = br[j];
                    c0[j] += a0 * bv;
                    c1[j] += a1 * bv;
                    c2[j] += a2 * bv;
                    c3[j] += a3 * bv;
                }
            }
        }
        for (; i < m; ++i) {
            float* __restrict ci = c + i * n;
            for (std::size_t p = k0; p < k1; ++p) {
                const float* __restrict br = b + p * n;
                const float av = a[i * k + p];
                for (std::size_t j = 0; j < n; ++j) ci[j] += av * br[j];
            }
        }
    }
}

}  // namespace wsi::detail

namespace wsi::kernels {

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* what) {
    if (t.rank() != rank) {
        throw DimensionError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got shape " +
                             shape_to_string(t.shape()));
    }
}

// Row-major transpose of a [rows x cols] block.
void transpose_into(const float* src, std::size_t rows, std::size_t cols, float* dst) noexcept {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
    }
}

struct ConvGeometry {
    std::size_t in_channels;
    std::size_t length;
    std::size_t out_channels;
    std::size_t in_per_group;
    std::size_t out_per_group;
    std::size_t kernel;
    std::size_t pad_left;
    std::size_t out_length;
};

ConvGeometry conv_geometry(const Tensor& x, const Shape& w_shape, const ConvParams& params) {
    require_rank(x, 2, "conv1d input");
    if (w_shape.size() != 3) {
        throw DimensionError("conv1d weight must be [C_out x C_in/groups x K], got " + shape_to_string(w_shape));
    }
    if (params.stride == 0 || params.groups == 0) throw DimensionError("conv1d stride and groups must be positive");
    ConvGeometry g{};
    g.in_channels = x.dim(0);
    g.length = x.dim(1);
    g.out_channels = w_shape[0];
    g.kernel = w_shape[2];
    if (g.in_channels % params.groups != 0 || g.out_channels % params.groups != 0) {
        throw DimensionError("conv1d channels " + std::to_string(g.in_channels) + "->" +
                             std::to_string(g.out_channels) + " not divisible by groups " +
                             std::to_string(params.groups));
    }
    g.in_per_group = g.in_channels / params.groups;
    g.out_per_group = g.out_channels / params.groups;
    if (w_shape[1] != g.in_per_group) {
        throw DimensionError("conv1d weight " + shape_to_string(w_shape) + " does not match input " +
                             shape_to_string(x.shape()) + " with " + std::to_string(params.groups) + " groups");
    }
    if (params.padding == Padding::none && g.length < g.kernel) {
        throw InputTooShortError("conv1d input length " + std::to_string(g.length) + " is shorter than kernel " +
                                 std::to_string(g.kernel));
    }
    g.pad_left = params.padding == Padding::same ? g.kernel / 2 : 0;
    g.out_length = conv1d_output_length(g.length, g.kernel, params.stride, params.padding);
    return g;
}

// Rows of the patch matrix for output positions [t0, t0 + count) of one group;
// column order (channel, tap) matches the weight layout.
void im2col(const Tensor& x, const ConvGeometry& g, std::size_t group, std::size_t stride, std::size_t t0,
            std::size_t count, float* patches) noexcept {
    const std::size_t width = g.in_per_group * g.kernel;
    for (std::size_t i = 0; i < count; ++i) {
        const std::ptrdiff_t start =
            static_cast<std::ptrdiff_t>((t0 + i) * stride) - static_cast<std::ptrdiff_t>(g.pad_left);
        float* dst = patches + i * width;
        for (std::size_t c = 0; c < g.in_per_group; ++c) {
            const float* src = x.row(group * g.in_per_group + c);
            for (std::size_t k = 0; k < g.kernel; ++k) {
                const std::ptrdiff_t pos = start + static_cast<std::ptrdiff_t>(k);
                dst[c * g.kernel + k] =
                    (pos >= 0 && pos < static_cast<std::ptrdiff_t>(g.length)) ? src[pos] : 0.0f;
            }
        }
    }
}

constexpr std::size_t kConvChunk = 256;

template <typename GroupGemm>
Tensor conv1d_impl(const Tensor& x, const ConvGeometry& g, const ConvParams& params, const Tensor* bias,
                   GroupGemm&& group_gemm) {
    if (bias != nullptr) require_shape(*bias, {g.out_channels}, "conv1d bias");
    const std::size_t width = g.in_per_group * g.kernel;
    Tensor out({g.out_channels, g.out_length});
    Tensor patches({std::min(kConvChunk, g.out_length), width});
    Tensor block({std::min(kConvChunk, g.out_length), g.out_per_group});
    for (std::size_t group = 0; group < params.groups; ++group) {
        for (std::size_t t0 = 0; t0 < g.out_length; t0 += kConvChunk) {
            const std::size_t count = std::min(kConvChunk, g.out_length - t0);
            im2col(x, g, group, params.stride, t0, count, patches.data().data());
            group_gemm(group, patches.data().data(), count, block.data().data());
            for (std::size_t o = 0; o < g.out_per_group; ++o) {
                const std::size_t channel = group * g.out_per_group + o;
                const float b = bias != nullptr ? (*bias)[channel] : 0.0f;
                float* dst = out.row(channel) + t0;
                for (std::size_t i = 0; i < count; ++i) dst[i] = block[i * g.out_per_group + o] + b;
            }
        }
    }
    require_finite(out, "conv1d output");
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul lhs");
    require_rank(b, 2, "matmul rhs");
    if (a.dim(1) != b.dim(0)) {
        throw DimensionError("matmul inner dimensions disagree: " + shape_to_string(a.shape()) + " x " +
                             shape_to_string(b.shape()));
    }
    require_finite(a, "matmul lhs");
    require_finite(b, "matmul rhs");
    Tensor c({a.dim(0), b.dim(1)});
    detail::gemm(a.data().data(), b.data().data(), c.data().data(), a.dim(0), a.dim(1), b.dim(1));
    require_finite(c, "matmul output");
    return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) {
        throw DimensionError("add shape mismatch: " + shape_to_string(a.shape()) + " vs " +
                             shape_to_string(b.shape()));
    }
    Tensor out(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    require_finite(out, "add output");
    return out;
}

Tensor transpose(const Tensor& x) {
    require_rank(x, 2, "transpose");
    Tensor out({x.dim(1), x.dim(0)});
    transpose_into(x.data().data(), x.dim(0), x.dim(1), out.data().data());
    return out;
}

std::size_t conv1d_output_length(std::size_t length, std::size_t kernel, std::size_t stride, Padding padding) {
    if (stride == 0) throw DimensionError("conv1d stride must be positive");
    if (padding == Padding::same) return (length - 1) / stride + 1;
    if (length < kernel) {
        throw InputTooShortError("conv1d input length " + std::to_string(length) + " is shorter than kernel " +
                                 std::to_string(kernel));
    }
    return (length - kernel) / stride + 1;
}

Tensor conv1d(const Tensor& x, const Tensor& w, const ConvParams& params, const Tensor* bias) {
    const ConvGeometry g = conv_geometry(x, w.shape(), params);
    require_finite(x, "conv1d input");
    const std::size_t width = g.in_per_group * g.kernel;
    // Per-group transposed weights [width x out_per_group] for the gemm.
    Tensor wt({params.groups * width, g.out_per_group});
    for (std::size_t group = 0; group < params.groups; ++group) {
        transpose_into(w.data().data() + group * g.out_per_group * width, g.out_per_group, width,
                       wt.data().data() + group * width * g.out_per_group);
    }
    return conv1d_impl(x, g, params, bias, [&](std::size_t group, const float* patches, std::size_t rows, float* out) {
        detail::gemm(patches, wt.data().data() + group * width * g.out_per_group, out, rows, width, g.out_per_group);
    });
}

Tensor conv1d(const Tensor& x, const QuantizedTensor& w, const ConvParams& params, const Tensor* bias) {
    const ConvGeometry g = conv_geometry(x, w.shape(), params);
    require_finite(x, "conv1d input");
    const std::size_t width = g.in_per_group * g.kernel;
    return conv1d_impl(x, g, params, bias, [&](std::size_t group, const float* patches, std::size_t rows, float* out) {
        const std::size_t first = group * g.out_per_group;
        detail::qgemm_rows(patches, rows, width, w.channel(first), w.scales().data() + first, g.out_per_group, out,
                           g.out_per_group);
    });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, float eps) {
    if (x.rank() == 0) throw DimensionError("layer_norm needs at least one dimension");
    const std::size_t width = x.shape().back();
    require_shape(gamma, {width}, "layer_norm gamma");
    require_shape(beta, {width}, "layer_norm beta");
    require_finite(x, "layer_norm input");
    Tensor out(x.shape());
    const std::size_t rows = x.size() / width;
    for (std::size_t r = 0; r < rows; ++r) {
        const float* src = x.data().data() + r * width;
        float* dst = out.data().data() + r * width;
        double mean = 0.0;
        for (std::size_t i = 0; i < width; ++i) mean += src[i];
        mean /= static_cast<double>(width);
        double var = 0.0;
        for (std::size_t i = 0; i < width; ++i) {
            const double d = src[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(width);
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        for (std::size_t i = 0; i < width; ++i) {
            dst[i] = static_cast<float>((src[i] - mean) * inv) * gamma[i] + beta[i];
        }
    }
    require_finite(out, "layer_norm output");
    return out;
}

Tensor gelu(const Tensor& x) {
    require_finite(x, "gelu input");
    Tensor out(x.shape());
    constexpr float kInvSqrt2 = 0.70710678118654752440f;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const float v = x[i];
        out[i] = 0.5f * v * (1.0f + std::erf(v * kInvSqrt2));
    }
    return out;
}

Tensor softmax(const Tensor& x, std::size_t axis) {
    if (axis >= x.rank()) {
        throw DimensionError("softmax axis " + std::to_string(axis) + " out of range for " + shape_to_string(x.shape()));
    }
    require_finite(x, "softmax input");
    const std::size_t n = x.dim(axis);
    std::size_t inner = 1;
    for (std::size_t d = axis + 1; d < x.rank(); ++d) inner *= x.dim(d);
    const std::size_t outer = x.size() / (n * inner);
    Tensor out(x.shape());
    std::vector<double> e(n);
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
            const std::size_t base = o * n * inner + in;
            float max_v = x[base];
            for (std::size_t i = 1; i < n; ++i) max_v = std::max(max_v, x[base + i * inner]);
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                e[i] = std::exp(static_cast<double>(x[base + i * inner] - max_v));
                sum += e[i];
            }
            for (std::size_t i = 0; i < n; ++i) out[base + i * inner] = static_cast<float>(e[i] / sum);
        }
    }
    return out;
}

std::size_t LinearWeights::out_features() const {
    if (weight != nullptr) return weight->dim(0);
    if (qweight != nullptr) return qweight->channels();
    throw DimensionError("linear layer has no weight");
}

std::size_t LinearWeights::in_features() const {
    if (weight != nullptr) return weight->dim(1);
    if (qweight != nullptr) return qweight->channel_size();
    throw DimensionError("linear layer has no weight");
}

Tensor linear(const Tensor& x, const LinearWeights& layer) {
    require_rank(x, 2, "linear input");
    if ((layer.weight == nullptr) == (layer.qweight == nullptr)) {
        throw DimensionError("linear layer needs exactly one of a float or int8 weight");
    }
    const std::size_t out_features = layer.out_features();
    const std::size_t in_features = layer.in_features();
    if (layer.weight != nullptr && layer.weight->rank() != 2) {
        throw DimensionError("linear weight must be 2-D, got " + shape_to_string(layer.weight->shape()));
    }
    if (x.dim(1) != in_features) {
        throw DimensionError("linear input " + shape_to_string(x.shape()) + " does not match weight [" +
                             std::to_string(out_features) + "x" + std::to_string(in_features) + "]");
    }
    if (layer.bias != nullptr) require_shape(*layer.bias, {out_features}, "linear bias");
    require_finite(x, "linear input");

    Tensor out;
    if (layer.weight != nullptr) {
        Tensor wt = transpose(*layer.weight);
        out = Tensor({x.dim(0), out_features});
        detail::gemm(x.data().data(), wt.data().data(), out.data().data(), x.dim(0), in_features, out_features);
    } else {
        out = qmatmul(x, *layer.qweight);
    }
    if (layer.bias != nullptr) {
        for (std::size_t r = 0; r < out.dim(0); ++r) {
            float* dst = out.row(r);
            for (std::size_t j = 0; j < out_features; ++j) dst[j] += (*layer.bias)[j];
        }
    }
    require_finite(out, "linear output");
    return out;
}

Tensor mhsa(const Tensor& x, const AttentionWeights& weights, std::size_t heads,
            std::vector<Tensor>* head_probabilities) {
    require_rank(x, 2, "mhsa input");
    const std::size_t steps = x.dim(0);
    const std::size_t hidden = x.dim(1);
    if (heads == 0 || hidden % heads != 0) {
        throw ConfigError("hidden size " + std::to_string(hidden) + " is not divisible by " + std::to_string(heads) +
                          " heads");
    }
    const std::size_t head_dim = hidden / heads;
    const Tensor q = linear(x, weights.query);
    const Tensor k = linear(x, weights.key);
    const Tensor v = linear(x, weights.value);
    if (q.dim(1) != hidden || k.dim(1) != hidden || v.dim(1) != hidden) {
        throw DimensionError("attention projections must preserve the hidden size " + std::to_string(hidden));
    }
    const float scale = 1.0f / std::sqrt(static_cast<float>(head_dim));
    if (head_probabilities != nullptr) head_probabilities->clear();

    Tensor context({steps, hidden});
    Tensor qh({steps, head_dim});
    Tensor kt({head_dim, steps});
    Tensor vh({steps, head_dim});
    Tensor ch({steps, head_dim});
    Tensor scores({steps, steps});
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * head_dim;
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t d = 0; d < head_dim; ++d) {
                qh.at(t, d) = q.at(t, off + d) * scale;
                kt.at(d, t) = k.at(t, off + d);
                vh.at(t, d) = v.at(t, off + d);
            }
        }
        detail::gemm(qh.data().data(), kt.data().data(), scores.data().data(), steps, head_dim, steps);
        const Tensor probs = softmax(scores, 1);
        detail::gemm(probs.data().data(), vh.data().data(), ch.data().data(), steps, steps, head_dim);
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t d = 0; d < head_dim; ++d) context.at(t, off + d) = ch.at(t, d);
        }
        if (head_probabilities != nullptr) head_probabilities->push_back(probs);
    }
    Tensor out = linear(context, weights.output);
    require_shape(out, {steps, hidden}, "mhsa output");
    return out;
}

}  // namespace wsi::kernels
