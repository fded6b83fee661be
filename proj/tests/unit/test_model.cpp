#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "reference_forward.hpp"
#include "wsi/compression.hpp"
#include "wsi/errors.hpp"
#include "wsi/model.hpp"

using namespace wsi;

namespace {

double max_logit_gap(const ClassScores& s, const reference::Forward& ref) {
    double gap = 0.0;
    for (std::size_t k = 0; k < s.logits.size(); ++k) gap = std::max(gap, std::abs(s.logits[k] - ref.logits[k]));
    return gap;
}

Model with_tensor(const Model& m, const std::string& name, Tensor value) {
    auto tensors = m.tensors();
    tensors.at(name) = std::move(value);
    return Model(m.config(), std::move(tensors), m.quant_policy());
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("build is deterministic per seed") {
    const auto c = test::tiny_config();
    const Model a = build_model(c, 9);
    const Model b = build_model(c, 9);
    const Model d = build_model(c, 10);
    bool all_same = true, any_diff = false;
    for (const auto& [name, p] : a.tensors()) {
        all_same &= params_identical(p, b.param(name));
        any_diff |= !params_identical(p, d.param(name));
    }
    CHECK(all_same);
    CHECK(any_diff);
}

TEST_CASE("unique weight sets follow the share group") {
    ModelConfig c = preset("nano");
    CHECK(unique_layer_sets(c) == 12);
    c.weight_share_group = 3;
    CHECK(unique_layer_sets(c) == 4);
    const auto map = make_tied_layer_map(12, 3);
    CHECK(map == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3});
    CHECK(make_tied_layer_map(7, 3) == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 2});
}

TEST_CASE("layer-sum logits start at zero") {
    const Model m = build_model(test::tiny_config(), 1);
    for (float v : m.tensor("head.layer_logits").data()) CHECK(v == 0.0f);
}

TEST_CASE("config validation") {
    ModelConfig c = preset("nano");
    c.heads = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = preset("nano");
    c.conv_strides.pop_back();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = preset("nano");
    c.weight_share_group = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK_THROWS_AS(preset("huge"), ConfigError);
}

TEST_CASE("config text round trip") {
    for (const auto& name : preset_names()) {
        const ModelConfig c = preset(name);
        CHECK(config_to_text(config_from_text(config_to_text(c))) == config_to_text(c));
    }
    const ModelConfig c = config_from_text("preset=nano\nweight_share_group=3\n");
    CHECK(c.hidden == 288);
    CHECK(c.weight_share_group == 3);
    CHECK_THROWS_AS(config_from_text("bogus=1\n"), ConfigError);
}

TEST_CASE("model constructor checks shapes") {
    const Model m = build_model(test::tiny_config(), 2);
    auto tensors = m.tensors();
    tensors.at("head.pooling.bias") = Tensor({3});
    CHECK_THROWS_AS(Model(m.config(), tensors), ConfigError);
    tensors = m.tensors();
    tensors.erase("head.pooling.bias");
    CHECK_THROWS_AS(Model(m.config(), tensors), ConfigError);
}

TEST_CASE("frontend geometry") {
    for (const char* name : {"nano", "micro", "small_pos"}) {
        const ModelConfig c = preset(name);
        CHECK(frontend_frames(c, c.clip_samples()) == 249);
    }
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 3);
    const Tensor frames = frontend_forward(m, test::random_clip(c, 4));
    CHECK(frames.shape() == Shape{249, c.hidden});
}

TEST_CASE("frame count ignores weights and channels") {
    ModelConfig c = test::tiny_config();
    c.conv_channels = 24;
    const Tensor a = frontend_forward(build_model(c, 1), test::random_clip(c, 1));
    c.conv_channels = 8;
    const Tensor b = frontend_forward(build_model(c, 2), test::random_clip(c, 2));
    CHECK(a.dim(0) == b.dim(0));
}

TEST_CASE("silent clip gives bias-only frames") {
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 5);
    ClipInput silent{std::vector<float>(c.clip_samples()), std::vector<float>(c.clip_samples())};
    const Tensor frames = frontend_forward(m, silent);
    for (std::size_t t = 1; t < frames.dim(0); ++t) {
        for (std::size_t j = 0; j < c.hidden; ++j) CHECK(frames.at(t, j) == frames.at(0, j));
    }
}

TEST_CASE("clip validation") {
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 5);
    ClipInput shortc{std::vector<float>(100), std::vector<float>(100)};
    CHECK_THROWS_AS(infer(m, shortc), InputError);
    ClipInput mismatched = test::random_clip(c, 1);
    mismatched.right.pop_back();
    CHECK_THROWS_AS(infer(m, mismatched), InputError);
    ClipInput rate = test::random_clip(c, 1);
    rate.sample_rate_hz = 8000;
    CHECK_THROWS_AS(infer(m, rate), InputError);
}

TEST_CASE("empty encoder returns its input") {
    ModelConfig c = test::tiny_config();
    c.num_layers = 0;
    c.has_positional_conv = false;
    const Model m = build_model(c, 6);
    const Tensor frames = frontend_forward(m, test::random_clip(c, 6));
    const auto outs = encoder_forward(m, frames);
    REQUIRE(outs.size() == 1);
    CHECK(outs[0].identical(frames));
}

TEST_CASE("head normalizations") {
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 7);
    const auto layers = encoder_forward(m, frontend_forward(m, test::random_clip(c, 7)));
    const HeadOutput h = head_forward(m, layers);
    auto sum = [](const Tensor& t) { return std::accumulate(t.data().begin(), t.data().end(), 0.0); };
    CHECK(std::abs(sum(h.layer_weights) - 1.0) < 1e-6);
    CHECK(std::abs(sum(h.pooling_weights) - 1.0) < 1e-6);
    CHECK(std::abs(sum(h.probabilities) - 1.0) < 1e-6);
}

TEST_CASE("zero classifier gives uniform probabilities") {
    const ModelConfig c = test::tiny_config();
    Model m = build_model(c, 8);
    m = with_tensor(m, "head.classifier.fc2.weight", Tensor({4, c.hidden}));
    m = with_tensor(m, "head.classifier.fc2.bias", Tensor({4}));
    const ClassScores s = infer(m, test::random_clip(c, 8));
    for (float p : s.probabilities) CHECK(p == 0.25f);
}

TEST_CASE("single frame pooling returns the frame") {
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 9);
    const Tensor frame = test::random_tensor({1, c.hidden}, 9);
    std::vector<Tensor> layers(c.num_layers + 1, frame);
    const HeadOutput h = head_forward(m, layers);
    CHECK(h.pooling_weights[0] == 1.0f);
    for (std::size_t j = 0; j < c.hidden; ++j) CHECK(h.embedding[j] == doctest::Approx(frame[j]).epsilon(1e-6));
}

TEST_CASE("inference is pure") {
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 10);
    const ClipInput clip = test::random_clip(c, 10);
    const ClassScores a = infer(m, clip);
    const ClassScores b = infer(m, clip);
    CHECK(a.logits == b.logits);
    CHECK(a.probabilities == b.probabilities);
    CHECK(a.embedding == b.embedding);
}

TEST_CASE("pico forward matches reference") {
    const ModelConfig c = test::tiny_config();
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const Model m = build_model(c, seed);
        const ClipInput clip = test::random_clip(c, 100 + seed);
        const ClassScores s = infer(m, clip);
        const reference::Forward ref = reference::forward(m, clip);
        CHECK(max_logit_gap(s, ref) < 1e-5);
        for (std::size_t j = 0; j < c.hidden; ++j) CHECK(std::abs(s.embedding[j] - ref.embedding[j]) < 1e-4);
    }
}

TEST_CASE("nano forward matches reference") {
    const ModelConfig c = preset("nano");
    const Model m = build_model(c, 2024);
    const ClipInput clip = test::random_clip(c, 2025);
    const ClassScores s = infer(m, clip);
    const reference::Forward ref = reference::forward(m, clip);
    CHECK(max_logit_gap(s, ref) < 1e-5);
}

TEST_CASE("removing the positional conv keeps shapes") {
    const ModelConfig c = test::tiny_config();
    const Model m = build_model(c, 11);
    const Model p = remove_positional_conv(m);
    const ClipInput clip = test::random_clip(c, 11);
    const auto a = encoder_forward(m, frontend_forward(m, clip));
    const auto b = encoder_forward(p, frontend_forward(p, clip));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].shape() == b[i].shape());
    CHECK(max_abs_difference(a.back(), b.back()) > 0.0f);
}

TEST_CASE("labels round trip") {
    for (int k = 0; k < 4; ++k) {
        const auto label = static_cast<ClassLabel>(k);
        CHECK(label_from_name(label_name(label)) == label);
    }
    CHECK_THROWS(label_from_name("cough"));
}

}
