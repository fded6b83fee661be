#pragma once

#include <vector>

#include "wsi/model.hpp"

// Straightforward double-precision forward pass, written without the
// library's kernels, for parity checks.
namespace wsi::reference {

using Matrix = std::vector<std::vector<double>>;  // [rows][cols]

struct Forward {
    Matrix frames;               // after projection and norm, [T][H]
    std::vector<Matrix> layers;  // num_layers + 1 outputs
    std::vector<double> embedding;
    std::vector<double> logits;
    std::vector<double> probabilities;
};

Forward forward(const Model& model, const ClipInput& clip);

}  // namespace wsi::reference
