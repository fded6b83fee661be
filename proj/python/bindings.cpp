#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wsi/analysis.hpp"
#include "wsi/compression.hpp"
#include "wsi/deploy.hpp"
#include "wsi/errors.hpp"
#include "wsi/io.hpp"
#include "wsi/metrics.hpp"
#include "wsi/model_file.hpp"
#include "wsi/quantization.hpp"

namespace py = pybind11;
using namespace wsi;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

std::vector<float> to_vector(const FloatArray& a) {
    if (a.ndim() != 1) throw InputError("expected a 1-D sample array");
    return {a.data(), a.data() + a.size()};
}

py::dict component_dict(const ByComponent<std::uint64_t>& v) {
    py::dict d;
    for (Component c : kComponents) d[py::str(std::string(component_name(c)))] = v[c];
    return d;
}

py::dict report_dict(const AnalysisReport& r) {
    py::dict d;
    d["frames"] = r.frames;
    d["total_params"] = r.total_params;
    d["total_macs"] = r.total_macs;
    d["bytes_float32"] = r.bytes_float32;
    d["bytes_quantized"] = r.bytes_quantized;
    d["params"] = component_dict(r.params_by_component);
    d["macs"] = component_dict(r.macs_by_component);
    py::dict pct;
    for (Component c : kComponents) pct[py::str(std::string(component_name(c)))] = r.percent_by_component[c];
    d["percent"] = pct;
    return d;
}

QuantPolicy policy_from(bool transformer, bool classifier, bool frontend, bool pos_conv) {
    return QuantPolicy{transformer, classifier, frontend, pos_conv};
}

}  // namespace

PYBIND11_MODULE(_wavlm_si, m) {
    m.doc() = "Compression toolkit and int8 inference runtime for speech-interruption models";

    static py::handle error = py::exception<Error>(m, "WsiError").release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object ex = py::reinterpret_borrow<py::object>(error)(py::str(e.what()));
            ex.attr("kind") = e.kind();
            PyErr_SetObject(error.ptr(), ex.ptr());
        }
    });

    py::class_<ModelConfig>(m, "ModelConfig")
        .def(py::init<>())
        .def_static("preset", [](const std::string& name) { return preset(name); })
        .def_static("from_text", [](const std::string& t) { return config_from_text(t); })
        .def("to_text", [](const ModelConfig& c) { return config_to_text(c); })
        .def_readwrite("conv_channels", &ModelConfig::conv_channels)
        .def_readwrite("hidden", &ModelConfig::hidden)
        .def_readwrite("num_layers", &ModelConfig::num_layers)
        .def_readwrite("heads", &ModelConfig::heads)
        .def_readwrite("ffn_ratio", &ModelConfig::ffn_ratio)
        .def_readwrite("weight_share_group", &ModelConfig::weight_share_group)
        .def_readwrite("has_positional_conv", &ModelConfig::has_positional_conv)
        .def_readwrite("pos_conv_kernel", &ModelConfig::pos_conv_kernel)
        .def_readwrite("pos_conv_groups", &ModelConfig::pos_conv_groups)
        .def_readwrite("sample_rate_hz", &ModelConfig::sample_rate_hz)
        .def_readwrite("clip_seconds", &ModelConfig::clip_seconds)
        .def_property_readonly("clip_samples", &ModelConfig::clip_samples);

    m.def("preset_names", &preset_names);

    py::class_<Model>(m, "Model")
        .def_property_readonly("config", &Model::config)
        .def_property_readonly("tied_layer_map", &Model::tied_layer_map)
        .def_property_readonly("unique_layer_count", &Model::unique_layer_count)
        .def_property_readonly("weights_bytes", &Model::weights_bytes)
        .def("tensor_names", [](const Model& model) {
            std::vector<std::string> names;
            for (const auto& [name, p] : model.tensors()) names.push_back(name);
            return names;
        })
        .def("is_quantized", [](const Model& model, const std::string& name) { return is_quantized(model.param(name)); })
        .def("to_bytes", [](const Model& model) { return py::bytes(encode_model(model)); })
        .def_static("from_bytes", [](const py::bytes& b) { return decode_model(std::string(b)); });

    m.def("build_model", &build_model, py::arg("config"), py::arg("seed"));
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "infer",
        [](const Model& model, const FloatArray& left, const FloatArray& right) {
            ClipInput clip{to_vector(left), to_vector(right), model.config().sample_rate_hz};
            ClassScores s;
            {
                py::gil_scoped_release release;
                s = infer(model, clip);
            }
            py::dict d;
            d["probabilities"] = s.probabilities;
            d["logits"] = s.logits;
            d["embedding"] = s.embedding;
            d["label"] = std::string(label_name(static_cast<ClassLabel>(s.label)));
            return d;
        },
        py::arg("model"), py::arg("left"), py::arg("right"));

    m.def(
        "quantize_model",
        [](const Model& model, bool transformer, bool classifier, bool frontend, bool pos_conv) {
            return quantize_model(model, policy_from(transformer, classifier, frontend, pos_conv));
        },
        py::arg("model"), py::arg("transformer") = true, py::arg("classifier") = true, py::arg("frontend") = false,
        py::arg("pos_conv") = false);
    m.def("remove_positional_conv", [](const Model& model) { return remove_positional_conv(model); });
    m.def("select_layers", [](const Model& model, std::vector<std::size_t> idx) {
        return select_layers(model, LayerSelection{std::move(idx)});
    });
    m.def("tie_weights", &tie_weights, py::arg("model"), py::arg("group"));
    m.def("materialize_ties", &materialize_ties);
    m.def("compress", [](const Model& model, const std::string& steps) {
        PipelineResult r = run_pipeline(model, parse_steps(steps));
        return py::make_tuple(std::move(r.model), r.log);
    });

    m.def(
        "analyze",
        [](const ModelConfig& config, double clip_seconds) {
            return report_dict(analyze(config, QuantPolicy{}, clip_seconds));
        },
        py::arg("config"), py::arg("clip_seconds") = 5.0);
    m.def(
        "analyze_model",
        [](const Model& model, double clip_seconds) {
            const QuantPolicy policy = model.quant_policy().any() ? model.quant_policy() : QuantPolicy{};
            return report_dict(analyze(model, policy, clip_seconds));
        },
        py::arg("model"), py::arg("clip_seconds") = 5.0);

    m.def(
        "tpr_at_fpr",
        [](const std::vector<float>& scores, const std::vector<bool>& positive, double budget) {
            if (scores.size() != positive.size()) throw InputError("scores and labels differ in length");
            std::vector<ScoredClip> clips(scores.size());
            for (std::size_t i = 0; i < scores.size(); ++i) {
                clips[i].true_label = positive[i] ? ClassLabel::failed_interruption : ClassLabel::backchannel;
                clips[i].scores[1] = scores[i];
            }
            return tpr_at_fpr(clips, ClassLabel::failed_interruption, budget);
        },
        py::arg("scores"), py::arg("positive"), py::arg("fpr_budget") = 0.01);

    m.def("trigger_interval", &trigger_interval);
    m.def("energy_reduction", [](double naive, double gated, double old_s, double new_s) {
        const EnergyReduction r = energy_reduction(naive, gated, old_s, new_s);
        return py::make_tuple(r.gating_factor, r.speedup_factor, r.combined);
    });
    m.def(
        "fleet_projection",
        [](const std::string& scenario_text) {
            const FleetProjection f = fleet_projection(parse_scenario(scenario_text));
            py::dict d;
            d["per_user_kwh_old"] = f.per_user_kwh_old;
            d["per_user_kwh_new"] = f.per_user_kwh_new;
            d["fleet_gwh_old"] = f.fleet_gwh_old;
            d["fleet_gwh_new"] = f.fleet_gwh_new;
            d["savings_gwh"] = f.savings_gwh;
            d["people_equivalent"] = f.people_equivalent;
            return d;
        },
        py::arg("scenario_text") = "");
    m.def(
        "detect_overlaps",
        [](const std::vector<std::vector<std::pair<double, double>>>& channels, double min_overlap_s) {
            ActivityTrace t;
            for (const auto& ch : channels) {
                std::vector<Interval> ivs;
                for (const auto& [s, e] : ch) ivs.push_back({s, e});
                t.channels.push_back(std::move(ivs));
            }
            std::vector<std::pair<double, double>> out;
            for (const auto& ev : detect_overlaps(t, min_overlap_s)) out.emplace_back(ev.onset_s, ev.duration_s);
            return out;
        },
        py::arg("channels"), py::arg("min_overlap_s") = 0.3);
}
