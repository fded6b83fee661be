#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wsi/config.hpp"
#include "wsi/model.hpp"

// Model-shrinking transforms. Each takes a model and returns a new one; the
// source is never modified.
namespace wsi {

// Drops the positional convolution. A model without one comes back unchanged
// and `already_absent` (when given) is set.
Model remove_positional_conv(const Model& model, bool* already_absent = nullptr);

// Ordered source layer indices; each < source num_layers, no duplicates.
struct LayerSelection {
    std::vector<std::size_t> source_indices;
};

// Builds a |selection|-layer untied model whose layer k starts from source
// layer selection[k]. Frontend and head are copied; the layer-sum logits are
// reset to zeros because their length changes.
Model select_layers(const Model& model, const LayerSelection& selection);

// Shares one weight set across each run of `group` neighbouring layers. Set k
// is taken from source layer k * group; a short final group is allowed.
Model tie_weights(const Model& model, std::size_t group);

// Untied equivalent of a tied model, with an explicit copy per layer.
Model materialize_ties(const Model& model);

struct CompressionStep {
    enum class Kind { drop_pos_conv, select_layers, tie, quantize };
    Kind kind;
    std::vector<std::size_t> indices;  // select_layers
    std::size_t group = 1;             // tie

    std::string to_string() const;
};

// Parses step lists such as "drop-pos-conv,select-layers=0,3,6,9,tie=3,quantize".
// Steps may be separated by commas, semicolons or whitespace; bare numbers
// after select-layers extend its index list. Throws ParseError for unknown steps.
std::vector<CompressionStep> parse_steps(std::string_view text);

struct PipelineResult {
    Model model;
    std::vector<std::string> log;  // one line per applied step, plus warnings
};

// Applies steps in the given order; `quantize` uses `policy`. Orders other
// than prune -> select -> tie -> quantize are allowed but noted in the log.
PipelineResult run_pipeline(const Model& model, const std::vector<CompressionStep>& steps,
                            const QuantPolicy& policy = QuantPolicy{});

}  // namespace wsi
