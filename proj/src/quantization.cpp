#include "wsi/quantization.hpp"

#include "wsi/errors.hpp"

namespace wsi {

Model quantize_model(const Model& model, const QuantPolicy& policy) {
    std::map<std::string, Param> tensors;
    for (const auto& spec : tensor_specs(model.config())) {
        const Param& p = model.param(spec.name);
        if (spec.matrix && policy_covers(policy, spec.component)) {
            if (is_quantized(p)) {
                throw QuantizationError("tensor '" + spec.name + "' is already quantized");
            }
            tensors.emplace(spec.name, quantize_tensor(std::get<Tensor>(p)));
        } else {
            tensors.emplace(spec.name, p);
        }
    }
    return Model(model.config(), std::move(tensors), model.quant_policy().merged(policy));
}

Model dequantize_model(const Model& model) {
    std::map<std::string, Param> tensors;
    for (const auto& [name, p] : model.tensors()) {
        if (const auto* q = std::get_if<QuantizedTensor>(&p)) {
            tensors.emplace(name, dequantize(*q));
        } else {
            tensors.emplace(name, p);
        }
    }
    return Model(model.config(), std::move(tensors));
}

}  // namespace wsi
