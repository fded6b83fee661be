#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wsi/analysis.hpp"
#include "wsi/compression.hpp"
#include "wsi/deploy.hpp"
#include "wsi/errors.hpp"
#include "wsi/io.hpp"
#include "wsi/metrics.hpp"
#include "wsi/model_file.hpp"

namespace {

using namespace wsi;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void print_scores(const ClassScores& s, bool embedding) {
    for (std::size_t k = 0; k < s.probabilities.size(); ++k) {
        std::printf("score.%s = %.7g\n", std::string(label_name(static_cast<ClassLabel>(k))).c_str(),
                    s.probabilities[k]);
    }
    std::printf("label = %s\n", std::string(label_name(static_cast<ClassLabel>(s.label))).c_str());
    if (embedding) {
        std::printf("embedding =");
        for (float v : s.embedding) std::printf(" %.7g", v);
        std::printf("\n");
    }
}

ClipInput clip_for(const Model& model, const std::string& path) {
    bool truncated = false;
    ClipInput clip = load_clip(path, model.config(), &truncated);
    if (truncated) {
        std::fprintf(stderr, "warning: '%s' is longer than %g s; using the first %g s\n", path.c_str(),
                     model.config().clip_seconds, model.config().clip_seconds);
    }
    return clip;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compression, analysis and int8 inference for speech-interruption models"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string config_path, in_path, out_path, steps, model_path, clip_path, scores_path, trace_path,
        scenario_path, audio_path, positive = "failed_interruption", format = "table";
    double clip_seconds = 5.0, fpr = 0.01, min_overlap = 0.3;
    std::size_t reps = 10;
    bool emit_embedding = false;

    auto* build = app.add_subcommand("build", "Build a seeded model from a config file");
    build->add_option("--config", config_path, "Config file (key=value, optional preset=)")->required();
    build->add_option("--seed", seed, "Weight seed")->required();
    build->add_option("--out", out_path, "Output model file")->required();

    auto* compress = app.add_subcommand("compress", "Apply compression steps in order");
    compress->add_option("--in", in_path, "Input model")->required();
    compress->add_option("--steps", steps, "drop-pos-conv | select-layers=i,j,k | tie=N | quantize")->required();
    compress->add_option("--out", out_path, "Output model")->required();

    auto* analyze_cmd = app.add_subcommand("analyze", "Parameter, MACs and size report");
    auto* analyze_in = analyze_cmd->add_option("--in", in_path, "Model file");
    analyze_cmd->add_option("--config", config_path, "Config file instead of a model")->excludes(analyze_in);
    analyze_cmd->add_option("--clip-seconds", clip_seconds, "Clip length for MACs")->capture_default_str();
    analyze_cmd->add_option("--format", format, "table or kv")->check(CLI::IsMember({"table", "kv"}))->capture_default_str();

    auto* infer_cmd = app.add_subcommand("infer", "Score one stereo clip");
    infer_cmd->add_option("--model", model_path, "Model file")->required();
    infer_cmd->add_option("--clip", clip_path, "Stereo 16 kHz PCM16 WAV")->required();
    infer_cmd->add_flag("--emit-embedding", emit_embedding, "Print the pooled embedding");

    auto* bench = app.add_subcommand("bench", "Real-time factor and memory");
    bench->add_option("--model", model_path, "Model file")->required();
    bench->add_option("--clip", clip_path, "Stereo 16 kHz PCM16 WAV")->required();
    bench->add_option("--reps", reps, "Runs including one warm-up (>= 3)")->required();

    auto* roc = app.add_subcommand("roc", "TPR at a fixed FPR from a score file");
    roc->add_option("--scores", scores_path, "Score CSV")->required();
    roc->add_option("--positive", positive, "Positive class")->capture_default_str();
    roc->add_option("--fpr", fpr, "FPR budget")->capture_default_str();

    auto* simulate = app.add_subcommand("simulate", "Overlap-gated triggering over a meeting trace");
    simulate->add_option("--trace", trace_path, "Activity trace")->required();
    simulate->add_option("--model", model_path, "Model file")->required();
    simulate->add_option("--audio", audio_path, "Stereo meeting WAV for trigger clips (default: synthetic)");
    simulate->add_option("--seed", seed, "Seed for synthetic clips")->capture_default_str();
    simulate->add_option("--min-overlap", min_overlap, "Minimum overlap seconds")->capture_default_str();

    auto* energy = app.add_subcommand("energy", "Energy reduction and fleet projection");
    energy->add_option("--scenario", scenario_path, "Scenario file (key=value)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        return 2;
    }

    try {
        if (*build) {
            const Model m = build_model(config_from_text(read_text(config_path)), seed);
            const std::size_t bytes = save_model(m, out_path);
            std::printf("wrote %s (%zu bytes)\n", out_path.c_str(), bytes);
        } else if (*compress) {
            const auto parsed = parse_steps(steps);
            const PipelineResult r = run_pipeline(load_model(in_path), parsed);
            for (const auto& line : r.log) std::fprintf(stderr, "%s\n", line.c_str());
            const std::size_t bytes = save_model(r.model, out_path);
            std::printf("wrote %s (%zu bytes)\n", out_path.c_str(), bytes);
        } else if (*analyze_cmd) {
            if (in_path.empty() && config_path.empty()) throw InputError("analyze needs --in or --config");
            AnalysisReport r;
            if (!in_path.empty()) {
                const Model m = load_model(in_path);
                const QuantPolicy policy = m.quant_policy().any() ? m.quant_policy() : QuantPolicy{};
                r = wsi::analyze(m, policy, clip_seconds);
                r.model_name = in_path;
            } else {
                r = wsi::analyze(config_from_text(read_text(config_path)), QuantPolicy{}, clip_seconds);
                r.model_name = config_path;
            }
            std::fputs((format == "kv" ? format_report_kv(r) : format_report_table(r)).c_str(), stdout);
        } else if (*infer_cmd) {
            const Model m = load_model(model_path);
            print_scores(infer(m, clip_for(m, clip_path)), emit_embedding);
        } else if (*bench) {
            const Model m = load_model(model_path);
            const ClipInput clip = clip_for(m, clip_path);
            const RtfResult r = bench_rtf(m, clip, reps);
            const MemoryTrace t = trace_memory(m, clip);
            std::printf("bench.timed_runs = %zu\nbench.mean_infer_s = %.6f\nbench.rtf = %.6f\n", r.timed_runs,
                        r.mean_infer_s, r.rtf);
            std::printf("memory.peak_live_bytes = %zu\nmemory.weights_bytes = %zu\nmemory.reserved_bytes = %zu\n",
                        t.peak_live_bytes, t.weights_bytes, t.reserved_bytes);
        } else if (*roc) {
            const auto clips = read_scores(scores_path);
            const ClassLabel label = label_from_name(positive);
            std::printf("tpr_at_fpr = %.6f\n", tpr_at_fpr(clips, label, fpr));
            const auto curve = roc_curve(clips, label);
            std::printf("auc = %.6f\n", roc_auc(curve));
            std::printf("# fpr tpr threshold\n");
            for (const auto& p : curve) std::printf("%.6f %.6f %.9g\n", p.fpr, p.tpr, p.threshold);
        } else if (*simulate) {
            const ActivityTrace trace = read_trace(trace_path);
            const Model m = load_model(model_path);
            ClipSource source;
            if (audio_path.empty()) {
                source = synthetic_clip_source(m.config(), seed);
            } else {
                WavData wav = read_wav(audio_path);
                if (wav.channels.size() != 2) throw ChannelCountError("meeting audio must be stereo");
                source = audio_clip_source(std::move(wav.channels[0]), std::move(wav.channels[1]),
                                           wav.sample_rate_hz, m.config());
            }
            const MeetingSimulation sim = simulate_meeting(trace, m, source, min_overlap);
            std::printf("# time_s label p_failed_interruption\n");
            for (const auto& t : sim.triggers) {
                std::printf("%.3f %s %.6f\n", t.time_s,
                            std::string(label_name(static_cast<ClassLabel>(t.scores.label))).c_str(),
                            t.scores.probabilities[1]);
            }
            std::printf("duration_s = %.3f\ntriggers = %zu\nnaive_triggers = %zu\ngating_ratio = %.4f\n",
                        sim.duration_s, sim.triggers.size(), sim.naive_triggers, sim.gating_ratio);
        } else if (*energy) {
            std::fputs(format_energy_report(read_scenario(scenario_path)).c_str(), stdout);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", e.kind().c_str(), e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 1;
    }
    return 0;
}
