#include "wsi/deploy.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "text_util.hpp"
#include "wsi/errors.hpp"

namespace wsi {

namespace {

constexpr double kTouch = 1e-9;

void require_positive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InputError(std::string(name) + " must be positive and finite, got " + text::format_double(value));
    }
}

}  // namespace

void ActivityTrace::validate() const {
    for (std::size_t c = 0; c < channels.size(); ++c) {
        double prev_end = -std::numeric_limits<double>::infinity();
        for (const auto& iv : channels[c]) {
            const std::string where = "channel " + std::to_string(c) + " interval [" +
                                      text::format_double(iv.start_s) + ", " + text::format_double(iv.end_s) + "]";
            if (!std::isfinite(iv.start_s) || !std::isfinite(iv.end_s) || iv.start_s < 0.0) {
                throw TraceError(where + " has invalid times");
            }
            if (!(iv.end_s > iv.start_s)) throw TraceError(where + " does not end after it starts");
            if (iv.start_s < prev_end) throw TraceError(where + " is unsorted or overlaps the previous one");
            prev_end = iv.end_s;
        }
    }
    if (!std::isfinite(length_s) || length_s < 0.0) throw TraceError("trace length must be >= 0");
}

double ActivityTrace::duration() const noexcept {
    double d = length_s;
    for (const auto& ch : channels) {
        if (!ch.empty()) d = std::max(d, ch.back().end_s);
    }
    return d;
}

std::vector<OverlapEvent> detect_overlaps(const ActivityTrace& trace, double min_overlap_s) {
    if (trace.channels.size() < 2) {
        throw TraceError("overlap detection needs at least 2 channels, got " + std::to_string(trace.channels.size()));
    }
    trace.validate();
    // (time, delta); at equal times ends sort before starts.
    std::vector<std::pair<double, int>> edges;
    for (const auto& ch : trace.channels) {
        for (const auto& iv : ch) {
            edges.emplace_back(iv.start_s, +1);
            edges.emplace_back(iv.end_s, -1);
        }
    }
    std::sort(edges.begin(), edges.end());

    std::vector<Interval> spans;
    int active = 0;
    double open = 0.0;
    for (const auto& [t, delta] : edges) {
        const int before = active;
        active += delta;
        if (before < 2 && active >= 2) {
            open = t;
        } else if (before >= 2 && active < 2 && t > open) {
            if (!spans.empty() && open - spans.back().end_s <= kTouch) {
                spans.back().end_s = t;
            } else {
                spans.push_back({open, t});
            }
        }
    }

    std::vector<OverlapEvent> events;
    for (const auto& s : spans) {
        const double d = s.end_s - s.start_s;
        if (d + kTouch >= min_overlap_s) events.push_back({s.start_s, d});
    }
    return events;
}

double trigger_interval(double total_audio_s, std::size_t n_overlaps) {
    if (n_overlaps == 0) throw UndefinedIntervalError("trigger interval is undefined with zero overlaps");
    require_positive(total_audio_s, "total_audio_s");
    return total_audio_s / static_cast<double>(n_overlaps);
}

EnergyReduction energy_reduction(double naive_interval_s, double gated_interval_s, double t_infer_old_s,
                                 double t_infer_new_s) {
    require_positive(naive_interval_s, "naive_interval_s");
    require_positive(gated_interval_s, "gated_interval_s");
    require_positive(t_infer_old_s, "t_infer_old_s");
    require_positive(t_infer_new_s, "t_infer_new_s");
    EnergyReduction r;
    r.gating_factor = gated_interval_s / naive_interval_s;
    r.speedup_factor = t_infer_old_s / t_infer_new_s;
    r.combined = r.gating_factor * r.speedup_factor;
    return r;
}

void EnergyScenario::validate() const {
    require_positive(baseline_watts, "baseline_watts");
    require_positive(model_watts_old, "model_watts_old");
    require_positive(model_watts_new, "model_watts_new");
    require_positive(naive_interval_s, "naive_interval_s");
    require_positive(trigger_interval_s, "trigger_interval_s");
    require_positive(inference_seconds_old, "inference_seconds_old");
    require_positive(inference_seconds_new, "inference_seconds_new");
    require_positive(active_hours_per_year, "active_hours_per_year");
    require_positive(per_capita_kwh, "per_capita_kwh");
    if (!(users >= 0.0) || !std::isfinite(users)) throw InputError("users must be >= 0");
}

double people_equivalent(double savings_gwh, double per_capita_kwh) {
    require_positive(per_capita_kwh, "per_capita_kwh");
    return savings_gwh * 1e6 / per_capita_kwh;
}

FleetProjection fleet_projection(const EnergyScenario& s) {
    s.validate();
    FleetProjection f;
    f.per_user_kwh_old = s.model_watts_old * s.active_hours_per_year / 1000.0;
    f.per_user_kwh_new = s.model_watts_new * s.active_hours_per_year / 1000.0;
    f.fleet_gwh_old = f.per_user_kwh_old * s.users / 1e6;
    f.fleet_gwh_new = f.per_user_kwh_new * s.users / 1e6;
    f.savings_gwh = f.fleet_gwh_old - f.fleet_gwh_new;
    f.people_equivalent = people_equivalent(f.savings_gwh, s.per_capita_kwh);
    return f;
}

std::string format_energy_report(const EnergyScenario& s) {
    const EnergyReduction r =
        energy_reduction(s.naive_interval_s, s.trigger_interval_s, s.inference_seconds_old, s.inference_seconds_new);
    const FleetProjection f = fleet_projection(s);
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    out << "reduction.gating_factor = " << r.gating_factor << '\n'
        << "reduction.speedup_factor = " << r.speedup_factor << '\n'
        << "reduction.combined = " << r.combined << '\n'
        << "reduction.measured_power_ratio = " << s.model_watts_old / s.model_watts_new << '\n'
        << "per_user_kwh.old = " << f.per_user_kwh_old << '\n'
        << "per_user_kwh.new = " << f.per_user_kwh_new << '\n'
        << "fleet_gwh.old = " << f.fleet_gwh_old << '\n'
        << "fleet_gwh.new = " << f.fleet_gwh_new << '\n'
        << "fleet_gwh.savings = " << f.savings_gwh << '\n';
    out.precision(0);
    out << "people_equivalent = " << f.people_equivalent << '\n';
    return out.str();
}

RtfResult bench_rtf(const Model& model, const ClipInput& clip, std::size_t repetitions) {
    if (repetitions < 3) throw InputError("bench needs at least 3 repetitions, got " + std::to_string(repetitions));
    validate_clip(model.config(), clip);
    InferenceSession session(model);
    session.run(clip);
    double total = 0.0;
    for (std::size_t i = 1; i < repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        session.run(clip);
        total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    RtfResult r;
    r.timed_runs = repetitions - 1;
    r.mean_infer_s = total / static_cast<double>(r.timed_runs);
    r.rtf = r.mean_infer_s / (static_cast<double>(clip.left.size()) / static_cast<double>(clip.sample_rate_hz));
    return r;
}

ClipSource synthetic_clip_source(const ModelConfig& config, std::uint64_t seed) {
    const std::size_t n = config.clip_samples();
    const std::size_t rate = config.sample_rate_hz;
    return [n, rate, seed](double, std::size_t index) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
        std::mt19937_64 rng(seq);
        auto uniform = [&rng] { return static_cast<float>(rng() >> 40) * (1.0f / 16777216.0f); };
        const double f_left = 100.0 + 300.0 * uniform();
        const double f_right = 100.0 + 300.0 * uniform();
        ClipInput clip;
        clip.sample_rate_hz = rate;
        clip.left.resize(n);
        clip.right.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) / static_cast<double>(rate);
            clip.left[i] = static_cast<float>(0.3 * std::sin(2.0 * std::numbers::pi * f_left * t)) +
                           0.05f * (2.0f * uniform() - 1.0f);
            clip.right[i] = static_cast<float>(0.3 * std::sin(2.0 * std::numbers::pi * f_right * t)) +
                            0.05f * (2.0f * uniform() - 1.0f);
        }
        return clip;
    };
}

ClipSource audio_clip_source(std::vector<float> left, std::vector<float> right, std::size_t sample_rate_hz,
                             const ModelConfig& config) {
    if (left.size() != right.size()) throw InputError("meeting audio channels differ in length");
    if (sample_rate_hz != config.sample_rate_hz) {
        throw InputError("meeting audio is " + std::to_string(sample_rate_hz) + " Hz, model expects " +
                         std::to_string(config.sample_rate_hz) + " Hz");
    }
    const std::size_t n = config.clip_samples();
    return [l = std::move(left), r = std::move(right), sample_rate_hz, n](double onset_s, std::size_t) {
        ClipInput clip;
        clip.sample_rate_hz = sample_rate_hz;
        clip.left.assign(n, 0.0f);
        clip.right.assign(n, 0.0f);
        const auto begin = static_cast<std::size_t>(std::llround(onset_s * static_cast<double>(sample_rate_hz)));
        for (std::size_t i = 0; i < n && begin + i < l.size(); ++i) {
            clip.left[i] = l[begin + i];
            clip.right[i] = r[begin + i];
        }
        return clip;
    };
}

MeetingSimulation simulate_meeting(const ActivityTrace& trace, const Model& model, const ClipSource& clips,
                                   double min_overlap_s, double naive_interval_s) {
    require_positive(naive_interval_s, "naive_interval_s");
    const auto events = detect_overlaps(trace, min_overlap_s);
    MeetingSimulation sim;
    sim.duration_s = trace.duration();
    sim.naive_triggers = static_cast<std::size_t>(std::floor(sim.duration_s / naive_interval_s + kTouch));
    InferenceSession session(model);
    for (std::size_t i = 0; i < events.size(); ++i) {
        sim.triggers.push_back({events[i].onset_s, session.run(clips(events[i].onset_s, i))});
    }
    sim.gating_ratio = sim.triggers.empty()
                           ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(sim.naive_triggers) / static_cast<double>(sim.triggers.size());
    return sim;
}

ActivityTrace activity_from_audio(std::span<const std::vector<float>> channels, std::size_t sample_rate_hz,
                                  double frame_ms, double threshold_db) {
    if (sample_rate_hz == 0) throw InputError("sample rate must be positive");
    require_positive(frame_ms, "frame_ms");
    const auto frame =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(frame_ms * 1e-3 * sample_rate_hz)));
    const double rate = static_cast<double>(sample_rate_hz);
    ActivityTrace trace;
    for (const auto& samples : channels) {
        std::vector<Interval> intervals;
        trace.length_s = std::max(trace.length_s, static_cast<double>(samples.size()) / rate);
        for (std::size_t begin = 0; begin < samples.size(); begin += frame) {
            const std::size_t end = std::min(samples.size(), begin + frame);
            double energy = 0.0;
            for (std::size_t i = begin; i < end; ++i) energy += double(samples[i]) * samples[i];
            const double rms = std::sqrt(energy / static_cast<double>(end - begin));
            if (rms <= 0.0 || 20.0 * std::log10(rms) < threshold_db) continue;
            const double s = static_cast<double>(begin) / rate;
            const double e = static_cast<double>(end) / rate;
            if (!intervals.empty() && intervals.back().end_s == s) {
                intervals.back().end_s = e;
            } else {
                intervals.push_back({s, e});
            }
        }
        trace.channels.push_back(std::move(intervals));
    }
    return trace;
}

}  // namespace wsi
