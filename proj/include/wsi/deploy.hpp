#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wsi/model.hpp"

namespace wsi {

struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
};

// Speech-active intervals per channel over a meeting timeline.
struct ActivityTrace {
    std::vector<std::vector<Interval>> channels;
    double length_s = 0.0;  // timeline length; 0 means up to the last interval end

    // Throws TraceError unless every channel is sorted, non-overlapping and
    // has end > start, with times >= 0.
    void validate() const;
    // max(length_s, latest interval end).
    double duration() const noexcept;
};

struct OverlapEvent {
    double onset_s = 0.0;
    double duration_s = 0.0;
};

// Maximal spans where at least two channels are active, keeping those that
// last at least `min_overlap_s`. Needs two or more channels.
std::vector<OverlapEvent> detect_overlaps(const ActivityTrace& trace, double min_overlap_s = 0.3);

// Average seconds between triggers.
double trigger_interval(double total_audio_s, std::size_t n_overlaps);

struct EnergyReduction {
    double gating_factor = 1.0;   // gated interval / naive interval
    double speedup_factor = 1.0;  // old inference time / new inference time
    double combined = 1.0;
};

EnergyReduction energy_reduction(double naive_interval_s, double gated_interval_s, double t_infer_old_s,
                                 double t_infer_new_s);

// Deployment scenario. Watts are average model power above the idle
// baseline; `active_hours_per_year` is an explicit usage assumption.
struct EnergyScenario {
    double baseline_watts = 7.16;
    double model_watts_old = 4.84;
    double model_watts_new = 0.19;
    double naive_interval_s = 5.0;
    double trigger_interval_s = 17.0;
    double inference_seconds_old = 1.6;
    double inference_seconds_new = 0.22;
    double users = 300e6;
    double active_hours_per_year = 208.8;
    double per_capita_kwh = 3128.0;

    void validate() const;
};

struct FleetProjection {
    double per_user_kwh_old = 0.0;
    double per_user_kwh_new = 0.0;
    double fleet_gwh_old = 0.0;
    double fleet_gwh_new = 0.0;
    double savings_gwh = 0.0;
    double people_equivalent = 0.0;
};

FleetProjection fleet_projection(const EnergyScenario& scenario);

// People whose yearly electricity use equals `savings_gwh`.
double people_equivalent(double savings_gwh, double per_capita_kwh);

std::string format_energy_report(const EnergyScenario& scenario);

struct RtfResult {
    double mean_infer_s = 0.0;
    double rtf = 0.0;
    std::size_t timed_runs = 0;
};

// Times `repetitions` inferences on the calling thread, discarding the first
// as warm-up. Needs repetitions >= 3.
RtfResult bench_rtf(const Model& model, const ClipInput& clip, std::size_t repetitions);

// Supplies the 5 s clip for a trigger at `onset_s`; `index` counts triggers.
using ClipSource = std::function<ClipInput(double onset_s, std::size_t index)>;

// Seeded noise-and-tone clips, one distinct clip per trigger index.
ClipSource synthetic_clip_source(const ModelConfig& config, std::uint64_t seed);

// Windows cut from stereo meeting audio, zero-padded past the end.
ClipSource audio_clip_source(std::vector<float> left, std::vector<float> right, std::size_t sample_rate_hz,
                             const ModelConfig& config);

struct TriggerRecord {
    double time_s = 0.0;
    ClassScores scores;
};

struct MeetingSimulation {
    std::vector<TriggerRecord> triggers;
    double duration_s = 0.0;
    std::size_t naive_triggers = 0;  // fixed-cadence inferences over the same duration
    double gating_ratio = 0.0;       // naive / gated; infinite with no triggers
};

// One inference per overlap event on the clip starting at the event onset.
MeetingSimulation simulate_meeting(const ActivityTrace& trace, const Model& model, const ClipSource& clips,
                                   double min_overlap_s = 0.3, double naive_interval_s = 5.0);

// Naive energy VAD: frames whose RMS is within `threshold_db` of full scale
// count as speech; adjacent active frames merge into intervals.
ActivityTrace activity_from_audio(std::span<const std::vector<float>> channels, std::size_t sample_rate_hz,
                                  double frame_ms = 30.0, double threshold_db = -40.0);

}  // namespace wsi
