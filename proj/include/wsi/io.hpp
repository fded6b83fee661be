#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wsi/deploy.hpp"
#include "wsi/metrics.hpp"
#include "wsi/model.hpp"

namespace wsi {

struct WavData {
    std::size_t sample_rate_hz = 0;
    std::vector<std::vector<float>> channels;  // normalized by 1/32768
};

// PCM16 WAV of any channel count and rate. Throws CodecError for other
// encodings and FormatError for a malformed container.
WavData read_wav(const std::string& path);
WavData decode_wav(std::string_view bytes);

std::string encode_wav(const WavData& wav);
void write_wav(const std::string& path, const WavData& wav);

// Stereo 16 kHz PCM16 clip of at least `config.clip_seconds`. Longer files
// keep the first clip and set `truncated`.
ClipInput load_clip(const std::string& path, const ModelConfig& config, bool* truncated = nullptr);
ClipInput clip_from_wav(const WavData& wav, const ModelConfig& config, bool* truncated = nullptr);

// CSV with header clip_id,true_label,s_backchannel,s_failed,s_interruption,s_laughter.
std::vector<ScoredClip> parse_scores(std::string_view text);
std::string format_scores(const std::vector<ScoredClip>& clips);
std::vector<ScoredClip> read_scores(const std::string& path);

// Lines "channel start end"; optional "length <seconds>" sets the timeline.
ActivityTrace parse_trace(std::string_view text);
std::string format_trace(const ActivityTrace& trace);
ActivityTrace read_trace(const std::string& path);

// key=value lines named after EnergyScenario fields; missing keys keep defaults.
EnergyScenario parse_scenario(std::string_view text);
std::string format_scenario(const EnergyScenario& scenario);
EnergyScenario read_scenario(const std::string& path);

}  // namespace wsi
