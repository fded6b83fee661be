#include "wsi/compression.hpp"

#include <set>

#include "text_util.hpp"
#include "wsi/errors.hpp"
#include "wsi/quantization.hpp"

namespace wsi {

namespace {

bool is_layer_tensor(const std::string& name) { return name.rfind("encoder.layers.", 0) == 0; }

// Suffix of a layer tensor name after "encoder.layers.<k>.".
std::string layer_suffix(const std::string& name) {
    const std::size_t start = std::string("encoder.layers.").size();
    return name.substr(name.find('.', start) + 1);
}

// Copies every non-layer tensor except those rejected by `skip`.
template <typename Skip>
std::map<std::string, Param> copy_shared(const Model& model, Skip&& skip) {
    std::map<std::string, Param> out;
    for (const auto& [name, p] : model.tensors()) {
        if (!is_layer_tensor(name) && !skip(name)) out.emplace(name, p);
    }
    return out;
}

// Adds unique set `target` to `out`, copied from the weights the source uses for `source_layer`.
void copy_layer(const Model& model, std::size_t source_layer, std::size_t target, std::map<std::string, Param>& out) {
    const std::string from = layer_prefix(model.tied_layer_map().at(source_layer));
    const std::string to = layer_prefix(target);
    for (const auto& [name, p] : model.tensors()) {
        if (name.rfind(from, 0) == 0) out.emplace(to + layer_suffix(name), p);
    }
}

}  // namespace

Model remove_positional_conv(const Model& model, bool* already_absent) {
    if (!model.config().has_positional_conv) {
        if (already_absent != nullptr) *already_absent = true;
        return model;
    }
    if (already_absent != nullptr) *already_absent = false;
    ModelConfig config = model.config();
    config.has_positional_conv = false;
    std::map<std::string, Param> tensors;
    for (const auto& [name, p] : model.tensors()) {
        if (name.rfind("pos_conv.", 0) != 0) tensors.emplace(name, p);
    }
    return Model(config, std::move(tensors), model.quant_policy());
}

Model select_layers(const Model& model, const LayerSelection& selection) {
    const auto& idx = selection.source_indices;
    if (idx.empty()) throw SelectionError("layer selection is empty");
    std::set<std::size_t> seen;
    for (std::size_t i : idx) {
        if (i >= model.config().num_layers) {
            throw SelectionError("layer index " + std::to_string(i) + " out of range for a " +
                                 std::to_string(model.config().num_layers) + "-layer model");
        }
        if (!seen.insert(i).second) throw SelectionError("layer index " + std::to_string(i) + " selected twice");
    }
    ModelConfig config = model.config();
    config.num_layers = idx.size();
    config.weight_share_group = 1;

    auto tensors = copy_shared(model, [](const std::string& name) { return name == "head.layer_logits"; });
    tensors.emplace("head.layer_logits", Tensor({config.num_layers + 1}));
    for (std::size_t k = 0; k < idx.size(); ++k) copy_layer(model, idx[k], k, tensors);
    return Model(config, std::move(tensors), model.quant_policy());
}

Model tie_weights(const Model& model, std::size_t group) {
    if (group == 0) throw ConfigError("tie group must be >= 1");
    ModelConfig config = model.config();
    config.weight_share_group = group;
    auto tensors = copy_shared(model, [](const std::string&) { return false; });
    for (std::size_t k = 0; k < unique_layer_sets(config); ++k) copy_layer(model, k * group, k, tensors);
    return Model(config, std::move(tensors), model.quant_policy());
}

Model materialize_ties(const Model& model) { return tie_weights(model, 1); }

std::string CompressionStep::to_string() const {
    switch (kind) {
        case Kind::drop_pos_conv: return "drop-pos-conv";
        case Kind::tie: return "tie=" + std::to_string(group);
        case Kind::quantize: return "quantize";
        case Kind::select_layers: {
            std::string out = "select-layers=";
            for (std::size_t i = 0; i < indices.size(); ++i) out += (i ? "," : "") + std::to_string(indices[i]);
            return out;
        }
    }
    return "?";
}

std::vector<CompressionStep> parse_steps(std::string_view body) {
    std::string normalized(body);
    for (char& ch : normalized) {
        if (ch == ';' || ch == ' ' || ch == '\t' || ch == '\n') ch = ',';
    }
    std::vector<CompressionStep> steps;
    for (const std::string& token : text::split(normalized, ',')) {
        if (token.empty()) continue;
        const bool numeric = token.find_first_not_of("0123456789") == std::string::npos;
        if (numeric) {
            if (steps.empty() || steps.back().kind != CompressionStep::Kind::select_layers) {
                throw ParseError("stray number '" + token + "' in step list");
            }
            steps.back().indices.push_back(text::to_size(token, "select-layers"));
            continue;
        }
        const auto eq = token.find('=');
        const std::string name = token.substr(0, eq);
        const std::string arg = eq == std::string::npos ? "" : token.substr(eq + 1);
        CompressionStep step{CompressionStep::Kind::quantize, {}, 1};
        if (name == "drop-pos-conv" && arg.empty()) {
            step.kind = CompressionStep::Kind::drop_pos_conv;
        } else if (name == "quantize" && arg.empty()) {
            step.kind = CompressionStep::Kind::quantize;
        } else if (name == "tie" && !arg.empty()) {
            step.kind = CompressionStep::Kind::tie;
            step.group = text::to_size(arg, "tie");
            if (step.group == 0) throw ParseError("tie group must be >= 1");
        } else if (name == "select-layers" && !arg.empty()) {
            step.kind = CompressionStep::Kind::select_layers;
            step.indices.push_back(text::to_size(arg, "select-layers"));
        } else {
            throw ParseError("unknown compression step '" + token + "'");
        }
        steps.push_back(std::move(step));
    }
    if (steps.empty()) throw ParseError("no compression steps given");
    return steps;
}

PipelineResult run_pipeline(const Model& model, const std::vector<CompressionStep>& steps, const QuantPolicy& policy) {
    PipelineResult result{model, {}};
    int last_rank = -1;
    for (const auto& step : steps) {
        const int rank = static_cast<int>(step.kind);
        if (rank < last_rank) {
            result.log.push_back("note: '" + step.to_string() +
                                 "' runs out of the canonical order drop-pos-conv, select-layers, tie, quantize");
        }
        last_rank = std::max(last_rank, rank);
        switch (step.kind) {
            case CompressionStep::Kind::drop_pos_conv: {
                bool absent = false;
                result.model = remove_positional_conv(result.model, &absent);
                if (absent) result.log.push_back("warning: model has no positional convolution; step skipped");
                break;
            }
            case CompressionStep::Kind::select_layers:
                result.model = select_layers(result.model, LayerSelection{step.indices});
                break;
            case CompressionStep::Kind::tie: result.model = tie_weights(result.model, step.group); break;
            case CompressionStep::Kind::quantize: result.model = quantize_model(result.model, policy); break;
        }
        result.log.push_back("applied " + step.to_string());
    }
    return result;
}

}  // namespace wsi
