#pragma once

#include "wsi/config.hpp"
#include "wsi/model.hpp"
#include "wsi/quantized_tensor.hpp"

namespace wsi {

// Post-training quantization of every weight matrix the policy covers.
// Biases, norms, layer-sum logits and the pooling vector stay float32.
// Throws QuantizationError if a covered matrix is already int8.
Model quantize_model(const Model& model, const QuantPolicy& policy);

// Float copy of a model with every int8 matrix expanded back to float32.
Model dequantize_model(const Model& model);

}  // namespace wsi
