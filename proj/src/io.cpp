#include "wsi/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "text_util.hpp"
#include "wsi/errors.hpp"

namespace wsi {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t get_u32(std::string_view b, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(b[at + i]);
    return v;
}

std::uint16_t get_u16(std::string_view b, std::size_t at) {
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(b[at]) |
                                      (static_cast<std::uint8_t>(b[at + 1]) << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>(v >> 8));
}

const std::string kScoreHeader = "clip_id,true_label,s_backchannel,s_failed,s_interruption,s_laughter";

}  // namespace

WavData decode_wav(std::string_view b) {
    if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE") {
        throw AudioError("not a RIFF/WAVE file");
    }
    std::size_t pos = 12;
    bool have_fmt = false;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t block_align = 0;
    while (pos + 8 <= b.size()) {
        const std::string_view id = b.substr(pos, 4);
        const std::uint32_t len = get_u32(b, pos + 4);
        const std::size_t body = pos + 8;
        if (id == "fmt ") {
            if (len < 16 || body + len > b.size()) throw AudioError("fmt chunk is truncated");
            std::uint16_t format = get_u16(b, body);
            channels = get_u16(b, body + 2);
            rate = get_u32(b, body + 4);
            block_align = get_u16(b, body + 12);
            const std::uint16_t bits = get_u16(b, body + 14);
            if (format == kFormatExtensible && len >= 26) format = get_u16(b, body + 24);
            if (format != kFormatPcm || bits != 16) {
                throw CodecError("unsupported WAV encoding (format " + std::to_string(format) + ", " +
                                 std::to_string(bits) + " bits); need PCM16");
            }
            if (channels == 0 || block_align != channels * 2u) throw AudioError("inconsistent WAV block alignment");
            have_fmt = true;
        } else if (id == "data") {
            if (!have_fmt) throw AudioError("data chunk before fmt chunk");
            const std::size_t avail = std::min<std::size_t>(len, b.size() - body);
            const std::size_t frames = avail / block_align;
            WavData wav;
            wav.sample_rate_hz = rate;
            wav.channels.assign(channels, std::vector<float>(frames));
            for (std::size_t f = 0; f < frames; ++f) {
                for (std::size_t c = 0; c < channels; ++c) {
                    const auto v = static_cast<std::int16_t>(get_u16(b, body + f * block_align + 2 * c));
                    wav.channels[c][f] = static_cast<float>(v) / 32768.0f;
                }
            }
            return wav;
        }
        pos = body + len + (len & 1u);
    }
    throw AudioError(have_fmt ? "WAV file has no data chunk" : "WAV file has no fmt chunk");
}

WavData read_wav(const std::string& path) { return decode_wav(text::read_file(path)); }

std::string encode_wav(const WavData& wav) {
    if (wav.channels.empty()) throw InputError("WAV needs at least one channel");
    const std::size_t frames = wav.channels.front().size();
    for (const auto& ch : wav.channels) {
        if (ch.size() != frames) throw InputError("WAV channels differ in length");
    }
    const auto nch = static_cast<std::uint16_t>(wav.channels.size());
    const auto data_bytes = static_cast<std::uint32_t>(frames * nch * 2);
    std::string out;
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, nch);
    put_u32(out, static_cast<std::uint32_t>(wav.sample_rate_hz));
    put_u32(out, static_cast<std::uint32_t>(wav.sample_rate_hz * nch * 2));
    put_u16(out, static_cast<std::uint16_t>(nch * 2));
    put_u16(out, 16);
    out += "data";
    put_u32(out, data_bytes);
    for (std::size_t f = 0; f < frames; ++f) {
        for (const auto& ch : wav.channels) {
            const double scaled = std::nearbyint(static_cast<double>(ch[f]) * 32768.0);
            put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0))));
        }
    }
    return out;
}

void write_wav(const std::string& path, const WavData& wav) { text::write_file(path, encode_wav(wav)); }

ClipInput clip_from_wav(const WavData& wav, const ModelConfig& config, bool* truncated) {
    if (wav.channels.size() != 2) {
        throw ChannelCountError("clip must have 2 channels, got " + std::to_string(wav.channels.size()));
    }
    if (wav.sample_rate_hz != config.sample_rate_hz) {
        throw SampleRateError("clip must be " + std::to_string(config.sample_rate_hz) + " Hz, got " +
                              std::to_string(wav.sample_rate_hz) + " Hz");
    }
    const std::size_t need = config.clip_samples();
    const std::size_t have = wav.channels[0].size();
    if (have < need) {
        throw InputError("clip has " + std::to_string(have) + " samples per channel, need " + std::to_string(need));
    }
    if (truncated != nullptr) *truncated = have > need;
    ClipInput clip;
    clip.sample_rate_hz = wav.sample_rate_hz;
    clip.left.assign(wav.channels[0].begin(), wav.channels[0].begin() + static_cast<std::ptrdiff_t>(need));
    clip.right.assign(wav.channels[1].begin(), wav.channels[1].begin() + static_cast<std::ptrdiff_t>(need));
    return clip;
}

ClipInput load_clip(const std::string& path, const ModelConfig& config, bool* truncated) {
    return clip_from_wav(read_wav(path), config, truncated);
}

std::vector<ScoredClip> parse_scores(std::string_view body) {
    std::vector<ScoredClip> clips;
    bool header_seen = false;
    std::size_t line_no = 0;
    for (const std::string& raw : text::split(body, '\n')) {
        ++line_no;
        const std::string line(text::trim(raw));
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kScoreHeader) throw ParseError("score file must start with '" + kScoreHeader + "'");
            header_seen = true;
            continue;
        }
        const auto fields = text::split(line, ',');
        const std::string where = "score line " + std::to_string(line_no);
        if (fields.size() != 6) throw ParseError(where + ": expected 6 fields, got " + std::to_string(fields.size()));
        ScoredClip clip;
        clip.clip_id = std::string(text::trim(fields[0]));
        try {
            clip.true_label = label_from_name(text::trim(fields[1]));
        } catch (const Error& e) {
            throw ParseError(where + ": " + e.what());
        }
        for (std::size_t k = 0; k < 4; ++k) {
            clip.scores[k] = static_cast<float>(text::to_double(text::trim(fields[2 + k]), where));
        }
        clips.push_back(std::move(clip));
    }
    if (!header_seen) throw ParseError("score file is empty");
    return clips;
}

std::string format_scores(const std::vector<ScoredClip>& clips) {
    std::string out = kScoreHeader + "\n";
    for (const auto& c : clips) {
        out += c.clip_id + "," + std::string(label_name(c.true_label));
        for (float s : c.scores) out += "," + text::format_double(s);
        out += "\n";
    }
    return out;
}

std::vector<ScoredClip> read_scores(const std::string& path) { return parse_scores(text::read_file(path)); }

ActivityTrace parse_trace(std::string_view body) {
    ActivityTrace trace;
    std::size_t line_no = 0;
    for (const std::string& raw : text::split(body, '\n')) {
        ++line_no;
        const std::string line(text::trim(raw));
        if (line.empty() || line[0] == '#') continue;
        std::istringstream in(line);
        std::string first;
        in >> first;
        const std::string where = "trace line " + std::to_string(line_no);
        if (first == "length") {
            std::string value;
            in >> value;
            trace.length_s = text::to_double(value, where);
            continue;
        }
        std::string start;
        std::string end;
        std::string extra;
        in >> start >> end;
        if (end.empty() || (in >> extra)) throw ParseError(where + ": expected 'channel start end'");
        const std::size_t channel = text::to_size(first, where);
        if (channel >= trace.channels.size()) trace.channels.resize(channel + 1);
        trace.channels[channel].push_back({text::to_double(start, where), text::to_double(end, where)});
    }
    trace.validate();
    return trace;
}

std::string format_trace(const ActivityTrace& trace) {
    std::string out;
    if (trace.length_s > 0.0) out += "length " + text::format_double(trace.length_s) + "\n";
    for (std::size_t c = 0; c < trace.channels.size(); ++c) {
        for (const auto& iv : trace.channels[c]) {
            out += std::to_string(c) + " " + text::format_double(iv.start_s) + " " + text::format_double(iv.end_s) +
                   "\n";
        }
    }
    return out;
}

ActivityTrace read_trace(const std::string& path) { return parse_trace(text::read_file(path)); }

namespace {

struct ScenarioField {
    const char* name;
    double EnergyScenario::*member;
};

constexpr ScenarioField kScenarioFields[] = {
    {"baseline_watts", &EnergyScenario::baseline_watts},
    {"model_watts_old", &EnergyScenario::model_watts_old},
    {"model_watts_new", &EnergyScenario::model_watts_new},
    {"naive_interval_s", &EnergyScenario::naive_interval_s},
    {"trigger_interval_s", &EnergyScenario::trigger_interval_s},
    {"inference_seconds_old", &EnergyScenario::inference_seconds_old},
    {"inference_seconds_new", &EnergyScenario::inference_seconds_new},
    {"users", &EnergyScenario::users},
    {"active_hours_per_year", &EnergyScenario::active_hours_per_year},
    {"per_capita_kwh", &EnergyScenario::per_capita_kwh},
};

}  // namespace

EnergyScenario parse_scenario(std::string_view body) {
    EnergyScenario s;
    for (const auto& [key, value] : text::parse_key_values(body)) {
        const auto* field = std::find_if(std::begin(kScenarioFields), std::end(kScenarioFields),
                                         [&](const ScenarioField& f) { return key == f.name; });
        if (field == std::end(kScenarioFields)) throw ParseError("unknown scenario key '" + key + "'");
        s.*(field->member) = text::to_double(value, key);
    }
    s.validate();
    return s;
}

std::string format_scenario(const EnergyScenario& s) {
    std::string out;
    for (const auto& f : kScenarioFields) out += std::string(f.name) + "=" + text::format_double(s.*(f.member)) + "\n";
    return out;
}

EnergyScenario read_scenario(const std::string& path) { return parse_scenario(text::read_file(path)); }

}  // namespace wsi
