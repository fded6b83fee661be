#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reference_forward.hpp"
#include "wsi/analysis.hpp"
#include "wsi/compression.hpp"
#include "wsi/deploy.hpp"
#include "wsi/metrics.hpp"
#include "wsi/model_file.hpp"
#include "wsi/quantization.hpp"
#include "wsi/quantized_tensor.hpp"

using namespace wsi;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [miss: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

ClipInput random_clip(const ModelConfig& c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-0.5f, 0.5f);
    ClipInput clip;
    clip.sample_rate_hz = c.sample_rate_hz;
    clip.left.resize(c.clip_samples());
    clip.right.resize(c.clip_samples());
    for (float& v : clip.left) v = u(rng);
    for (float& v : clip.right) v = u(rng);
    return clip;
}

Tensor random_tensor(const Shape& shape, std::mt19937_64& rng) {
    const float scale = std::ldexp(1.0f, static_cast<int>(rng() % 16) - 8);
    std::uniform_real_distribution<float> u(-scale, scale);
    Tensor t(shape);
    for (float& v : t.data()) v = u(rng);
    if (rng() % 8 == 0) {
        for (std::size_t j = 0; j < shape[1]; ++j) t.at(0, j) = 0.0f;
    }
    return t;
}

const char* kTableConfigs[] = {"small_pos", "micro", "micro_ws", "nano_pos", "nano", "nano_ws"};
const double kTableParams[] = {54.0, 24.4, 8.1, 13.6, 12.7, 4.9};

Outcome criterion1() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < 6; ++i) {
        const AnalysisReport r = analyze(preset(kTableConfigs[i]), QuantPolicy{});
        const double m = static_cast<double>(r.total_params) / 1e6;
        o.detail << " " << kTableConfigs[i] << "=" << m << "M/" << kTableParams[i];
        o.require(within(m, kTableParams[i], 0.10), kTableConfigs[i]);
    }
    const double elapsed = seconds_since(t0);
    o.detail << " time=" << elapsed << "s";
    o.require(elapsed < 1.0, "runtime");
    return o;
}

Outcome criterion2() {
    Outcome o;
    const struct {
        const char* name;
        double target;
        double tol;
    } rows[] = {{"small_pos", 31.2, 0.10}, {"micro", 13.9, 0.10}, {"nano", 6.4, 0.15}};
    for (const auto& row : rows) {
        const double g = static_cast<double>(count_macs(preset(row.name), 5.0, 16000).total()) / 1e9;
        o.detail << " " << row.name << "=" << g << "G/" << row.target;
        o.require(within(g, row.target, row.tol), row.name);
    }
    return o;
}

Outcome criterion3() {
    Outcome o;
    const double small = serialized_size(preset("small_pos"), QuantPolicy{}).float32 / 1e6;
    const double nano_ws = serialized_size(preset("nano_ws"), QuantPolicy{}).quantized / 1e6;
    o.detail << " small_pos_float32=" << small << "MB/222.7 nano_ws_int8=" << nano_ws << "MB/9.3";
    o.require(within(small, 222.7, 0.15), "small_pos float32 size");
    o.require(within(nano_ws, 9.3, 0.15), "nano_ws quantized size");
    return o;
}

Outcome criterion4() {
    Outcome o;
    const EnergyReduction r = energy_reduction(5, 17, 1.6, 0.22);
    o.detail << " gating=" << r.gating_factor << " speedup=" << r.speedup_factor << " combined=" << r.combined;
    o.require(r.gating_factor == 3.4, "gating");
    o.require(std::abs(r.speedup_factor - 7.27) <= 0.01, "speedup");
    o.require(std::abs(r.combined - 24.7) <= 0.1, "combined");
    const FleetProjection f = fleet_projection(EnergyScenario{});
    const struct {
        const char* name;
        double value;
        double target;
    } rows[] = {{"per_user_old", f.per_user_kwh_old, 1.01}, {"per_user_new", f.per_user_kwh_new, 0.04},
                {"fleet_old", f.fleet_gwh_old, 303.0},      {"fleet_new", f.fleet_gwh_new, 12.0},
                {"savings", f.savings_gwh, 290.0},          {"people", f.people_equivalent, 92711.0}};
    for (const auto& row : rows) {
        o.detail << " " << row.name << "=" << row.value;
        o.require(within(row.value, row.target, 0.01), row.name);
    }
    const double exact = people_equivalent(290.0, 3128.0);
    o.detail << " people(290GWh)=" << exact;
    o.require(std::abs(exact - 92711.0) <= 1.0, "people from exact inputs");
    return o;
}

Outcome criterion5() {
    Outcome o;
    const double interval = trigger_interval(979200.0, 57450);
    o.detail << " interval=" << interval << "s";
    o.require(std::abs(interval - 17.04) <= 0.01, "trigger interval");

    ActivityTrace trace;
    trace.length_s = 3600.0;
    trace.channels.resize(2);
    trace.channels[0].push_back({0.0, 3600.0});
    for (double s = 0.0; s < 3600.0; s += 17.0) trace.channels[1].push_back({s, s + 1.0});
    const ModelConfig c = preset("pico");
    const Model m = build_model(c, 1);
    const MeetingSimulation sim = simulate_meeting(trace, m, synthetic_clip_source(c, 1));
    o.detail << " triggers=" << sim.triggers.size() << " naive=" << sim.naive_triggers
             << " ratio=" << sim.gating_ratio;
    o.require(std::abs(sim.gating_ratio - 3.4) <= 0.05, "gating ratio");
    return o;
}

ModelConfig parity_config() {
    ModelConfig c = preset("nano_pos");
    c.conv_channels = 64;
    c.hidden = 96;
    c.heads = 2;
    c.num_layers = 4;
    return c;
}

Outcome criterion6() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const ModelConfig c = parity_config();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Model m = build_model(c, 1000 + seed);
        for (std::uint64_t k = 0; k < 5; ++k) {
            const ClipInput clip = random_clip(c, seed * 100 + k);
            const ClassScores s = infer(m, clip);
            const reference::Forward ref = reference::forward(m, clip);
            for (std::size_t j = 0; j < s.logits.size(); ++j) {
                worst = std::max(worst, std::abs(static_cast<double>(s.logits[j]) - ref.logits[j]));
            }
        }
    }
    const double elapsed = seconds_since(t0);
    o.detail << " cases=50 max_logit_diff=" << worst << " time=" << elapsed << "s";
    o.require(worst <= 1e-5, "logit parity");
    o.require(elapsed < 120.0, "runtime");
    return o;
}

Outcome criterion7() {
    Outcome o;
    std::mt19937_64 rng(7);
    std::size_t bound_fail = 0, fixed_fail = 0, channel_fail = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Shape shape{1 + rng() % 16, 1 + rng() % 64};
        const Tensor w = random_tensor(shape, rng);
        const QuantizedTensor q = quantize_tensor(w);
        const Tensor d = dequantize(q);
        float global = 0.0f;
        for (float v : w.data()) global = std::max(global, std::abs(v));
        const float gs = symmetric_scale(global);
        double per_channel = 0.0, per_tensor = 0.0;
        for (std::size_t r = 0; r < shape[0]; ++r) {
            const float s = q.scales()[r];
            for (std::size_t j = 0; j < shape[1]; ++j) {
                const double e = std::abs(double(w.at(r, j)) - double(d.at(r, j)));
                if (e > s / 2.0) ++bound_fail;
                per_channel = std::max(per_channel, e);
                per_tensor = std::max(per_tensor, std::abs(double(w.at(r, j)) - double(quantize_value(w.at(r, j), gs) * gs)));
            }
        }
        if (!dequantize(quantize_tensor(d)).identical(d)) ++fixed_fail;
        if (per_channel > per_tensor) ++channel_fail;
    }
    o.detail << " bound_violations=" << bound_fail << " second_trip_changes=" << fixed_fail
             << " per_channel_worse=" << channel_fail;
    o.require(bound_fail == 0, "round-trip bound");
    o.require(fixed_fail == 0, "second round trip");
    o.require(channel_fail == 0, "per-channel dominance");

    const Model f = build_model(preset("nano_ws"), 77);
    const Model q = quantize_model(f, QuantPolicy{});
    InferenceSession fs(f);
    InferenceSession qs(q);
    std::size_t agree = 0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const ClipInput clip = random_clip(f.config(), 5000 + k);
        agree += fs.run(clip).label == qs.run(clip).label ? 1 : 0;
    }
    o.detail << " argmax_agreement=" << agree << "/100";
    o.require(agree >= 99, "argmax agreement");
    return o;
}

Outcome criterion8() {
    Outcome o;
    const ModelConfig c = preset("nano");
    const ClipInput clip = random_clip(c, 8);
    const Model tied = build_model(preset("nano_ws"), 8);
    const Model untied = materialize_ties(tied);
    const ClassScores a = infer(tied, clip);
    const ClassScores b = infer(untied, clip);
    double tie_gap = 0.0;
    for (std::size_t k = 0; k < 4; ++k) tie_gap = std::max(tie_gap, double(std::abs(a.logits[k] - b.logits[k])));
    o.detail << " tied_vs_untied=" << tie_gap;
    o.require(tie_gap <= 1e-6, "tied equals materialized");

    const Model m = build_model(c, 9);
    std::vector<std::size_t> all(c.num_layers);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Model s = select_layers(m, {all});
    const auto la = encoder_forward(m, frontend_forward(m, clip));
    const auto lb = encoder_forward(s, frontend_forward(s, clip));
    float sel_gap = 0.0f;
    for (std::size_t i = 0; i < la.size(); ++i) sel_gap = std::max(sel_gap, max_abs_difference(la[i], lb[i]));
    o.detail << " identity_selection=" << sel_gap;
    o.require(sel_gap <= 1e-6f, "identity selection");

    const auto full = count_params(m)[Component::transformer];
    const auto shared = count_params(tie_weights(m, 3))[Component::transformer];
    o.detail << " transformer_params=" << full << "/" << shared;
    o.require(full == 3 * shared, "tie=3 divides by 3");

    ModelConfig l4 = preset("nano_ws");
    l4.num_layers = 4;
    ModelConfig l6 = l4;
    l6.num_layers = 6;
    const auto p4 = count_params(l4)[Component::transformer];
    const auto p6 = count_params(l6)[Component::transformer];
    o.detail << " L4=" << p4 << " L6=" << p6;
    o.require(p4 == p6, "stepping");
    return o;
}

ScoredClip scored(bool positive, float s) {
    ScoredClip c;
    c.true_label = positive ? ClassLabel::failed_interruption : ClassLabel::backchannel;
    c.scores[1] = s;
    return c;
}

Outcome criterion9() {
    Outcome o;
    constexpr ClassLabel pos = ClassLabel::failed_interruption;
    std::vector<ScoredClip> perfect;
    for (int i = 0; i < 10; ++i) perfect.push_back(scored(true, 0.9f));
    for (int i = 0; i < 90; ++i) perfect.push_back(scored(false, 0.1f + 0.001f * i));
    std::vector<ScoredClip> tied;
    for (int i = 0; i < 10; ++i) tied.push_back(scored(true, 0.5f));
    for (int i = 0; i < 100; ++i) tied.push_back(scored(false, 0.5f));
    std::vector<ScoredClip> ladder;
    for (int i = 0; i < 99; ++i) ladder.push_back(scored(false, 0.01f * i));
    for (int i = 0; i < 10; ++i) ladder.push_back(scored(true, 1.0f));
    const double e1 = tpr_at_fpr(perfect, pos, 0.01);
    const double e2 = tpr_at_fpr(tied, pos, 0.01);
    const double e3 = tpr_at_fpr(ladder, pos, 0.01);
    o.detail << " examples=" << e1 << "," << e2 << "," << e3;
    o.require(e1 == 1.0 && e2 == 0.0 && e3 == 1.0, "worked examples");

    std::mt19937_64 rng(9);
    std::size_t mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ScoredClip> clips;
        const std::size_t n = 20 + rng() % 200;
        for (std::size_t i = 0; i < n; ++i) {
            const bool p = i == 0 || (i != 1 && rng() % 4 == 0);
            clips.push_back(scored(p, static_cast<float>(rng() % 50 + (p ? 10 : 0)) / 60.0f));
        }
        std::size_t npos = 0, nneg = 0;
        for (const auto& c : clips) (c.true_label == pos ? npos : nneg)++;
        for (double budget : {0.01, 0.05, 0.1}) {
            double best = 0.0;
            for (const auto& t : clips) {
                std::size_t tp = 0, fp = 0;
                for (const auto& c : clips) {
                    if (c.scores[1] >= t.scores[1]) (c.true_label == pos ? tp : fp)++;
                }
                if (double(fp) / double(nneg) <= budget) best = std::max(best, double(tp) / double(npos));
            }
            mismatches += tpr_at_fpr(clips, pos, budget) == best ? 0 : 1;
        }
    }
    o.detail << " brute_force_mismatches=" << mismatches;
    o.require(mismatches == 0, "brute-force agreement");
    return o;
}

Outcome criterion10() {
    Outcome o;
    const ModelConfig c = preset("nano");
    const Model nano = build_model(c, 10);
    const ClipInput clip = random_clip(c, 10);
    InferenceSession session(nano);
    std::size_t lo = SIZE_MAX, hi = 0;
    for (int i = 0; i < 100; ++i) {
        session.run(clip);
        lo = std::min(lo, session.last_peak_bytes());
        hi = std::max(hi, session.last_peak_bytes());
    }
    o.detail << " arena_peak=" << lo << ".." << hi;
    o.require(lo == hi, "constant arena peak");

    const double r_nano = bench_rtf(nano, clip, 3).rtf;
    const double r_micro = bench_rtf(build_model(preset("micro"), 10), clip, 3).rtf;
    const double r_small = bench_rtf(build_model(preset("small_pos"), 10), clip, 3).rtf;
    o.detail << " rtf nano=" << r_nano << " micro=" << r_micro << " small_pos=" << r_small;
    o.require(r_nano < r_micro && r_micro < r_small, "rtf ordering");

    bool identical = true;
    for (const Model& m : {nano, quantize_model(build_model(preset("nano_ws"), 10), QuantPolicy{})}) {
        const std::string bytes = encode_model(m);
        identical &= encode_model(decode_model(bytes)) == bytes;
    }
    o.detail << " save_load_identical=" << (identical ? "yes" : "no");
    o.require(identical, "byte-identical round trip");
    return o;
}

}  // namespace

int main() {
    using Check = Outcome (*)();
    const struct {
        const char* title;
        Check run;
    } criteria[] = {
        {"parameter counts", criterion1},   {"MACs per clip", criterion2},
        {"model file sizes", criterion3},   {"energy arithmetic", criterion4},
        {"trigger cadence", criterion5},    {"oracle parity", criterion6},
        {"quantization properties", criterion7}, {"compression correctness", criterion8},
        {"metric correctness", criterion9}, {"runtime hygiene", criterion10},
    };
    int failures = 0;
    int n = 0;
    for (const auto& criterion : criteria) {
        ++n;
        Outcome o;
        try {
            o = criterion.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [error: " << e.what() << "]";
        }
        failures += o.pass ? 0 : 1;
        std::printf("criterion %2d %-24s %s:%s\n", n, criterion.title, o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", n - failures, n);
    return failures == 0 ? 0 : 1;
}
