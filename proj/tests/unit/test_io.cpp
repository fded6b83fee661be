#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "wsi/compression.hpp"
#include "wsi/errors.hpp"
#include "wsi/io.hpp"
#include "wsi/model_file.hpp"
#include "wsi/quantization.hpp"

using namespace wsi;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("wsi_test_" + name)).string();
}

void put_u64(std::string& bytes, std::size_t at, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes[at + i] = static_cast<char>((v >> (8 * i)) & 0xFF);
}

// Offset of the first directory entry's u64 offset field.
std::size_t first_offset_field(const std::string& bytes) {
    std::uint32_t header_len = 0;
    std::memcpy(&header_len, bytes.data() + 6, 4);
    std::size_t at = 10 + header_len + 4;
    std::uint16_t name_len = 0;
    std::memcpy(&name_len, bytes.data() + at, 2);
    at += 2 + name_len;
    const auto rank = static_cast<std::uint8_t>(bytes[at + 1]);
    return at + 2 + 4 * rank;
}

WavData stereo(std::size_t frames, std::size_t rate = 16000) {
    WavData w;
    w.sample_rate_hz = rate;
    w.channels.assign(2, std::vector<float>(frames));
    for (std::size_t i = 0; i < frames; ++i) {
        w.channels[0][i] = static_cast<float>(static_cast<int>(i % 200) - 100) / 32768.0f;
        w.channels[1][i] = -w.channels[0][i];
    }
    return w;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("model round trip is bit exact") {
    const ModelConfig c = test::tiny_config();
    for (const Model& m : {build_model(c, 1), quantize_model(build_model(c, 2), QuantPolicy{}),
                           tie_weights(build_model(c, 3), 2)}) {
        const std::string bytes = encode_model(m);
        const Model back = decode_model(bytes);
        CHECK(config_to_text(back.config()) == config_to_text(m.config()));
        CHECK(policy_to_text(back.quant_policy()) == policy_to_text(m.quant_policy()));
        CHECK(back.tied_layer_map() == m.tied_layer_map());
        REQUIRE(back.tensors().size() == m.tensors().size());
        for (const auto& [name, p] : m.tensors()) CHECK(params_identical(p, back.param(name)));
        CHECK(encode_model(back) == bytes);
        CHECK(bytes.size() == encoded_size(m.config(), m.quant_policy()));
    }
}

TEST_CASE("save and load through a file") {
    const Model m = build_model(test::tiny_config(), 4);
    const std::string path = temp_path("model.wsi");
    const std::size_t written = save_model(m, path);
    CHECK(written == std::filesystem::file_size(path));
    CHECK(encode_model(load_model(path)) == encode_model(m));
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), IoError);
}

TEST_CASE("same seed gives identical files") {
    CHECK(encode_model(build_model(test::tiny_config(), 5)) == encode_model(build_model(test::tiny_config(), 5)));
}

TEST_CASE("corrupt files raise distinct errors") {
    const std::string good = encode_model(build_model(test::tiny_config(), 6));
    std::string bad = good;
    bad[0] = 'X';
    CHECK_THROWS_AS(decode_model(bad), BadMagicError);
    bad = good;
    bad[4] = 9;
    CHECK_THROWS_AS(decode_model(bad), VersionMismatchError);
    CHECK_THROWS_AS(decode_model(good.substr(0, good.size() - 10)), TruncatedError);
    CHECK_THROWS_AS(decode_model(good.substr(0, 20)), TruncatedError);
    bad = good;
    put_u64(bad, first_offset_field(bad), 7);
    CHECK_THROWS_AS(decode_model(bad), StructureError);
    bad = good;
    put_u64(bad, first_offset_field(bad), ~std::uint64_t{0} - 3);
    CHECK_THROWS_AS(decode_model(bad), StructureError);
    CHECK_THROWS_AS(decode_model(good + "x"), StructureError);
    bad = good;
    const std::size_t hidden_at = bad.find("hidden=48");
    REQUIRE(hidden_at != std::string::npos);
    bad.replace(hidden_at, 9, "hidden=96");
    CHECK_THROWS_AS(decode_model(bad), InconsistentModelError);
}

TEST_CASE("random corruption never crashes") {
    const std::string good = encode_model(build_model(test::tiny_config(), 7));
    std::mt19937_64 rng(7);
    const std::size_t payload_start = good.find("head.pooling.weight") + 64;
    for (int trial = 0; trial < 300; ++trial) {
        std::string bad = good;
        const std::size_t at = rng() % std::min(bad.size(), payload_start);
        bad[at] = static_cast<char>(rng());
        try {
            decode_model(bad);
        } catch (const FormatError&) {
        }
    }
}

TEST_CASE("wav clip loading") {
    const ModelConfig c = test::tiny_config();
    const std::string path = temp_path("clip.wav");
    write_wav(path, stereo(80000));
    bool truncated = true;
    const ClipInput clip = load_clip(path, c, &truncated);
    CHECK_FALSE(truncated);
    CHECK(clip.left.size() == 80000);
    CHECK(clip.right.size() == 80000);
    CHECK(clip.left[0] == -100.0f / 32768.0f);
    CHECK(clip.right[0] == 100.0f / 32768.0f);

    write_wav(path, stereo(90000));
    CHECK(load_clip(path, c, &truncated).left.size() == 80000);
    CHECK(truncated);

    WavData silent = stereo(80000);
    for (auto& ch : silent.channels) std::fill(ch.begin(), ch.end(), 0.0f);
    write_wav(path, silent);
    for (float v : load_clip(path, c).left) CHECK(v == 0.0f);

    WavData mono = stereo(80000);
    mono.channels.pop_back();
    write_wav(path, mono);
    CHECK_THROWS_AS(load_clip(path, c), ChannelCountError);
    write_wav(path, stereo(80000, 8000));
    CHECK_THROWS_AS(load_clip(path, c), SampleRateError);
    write_wav(path, stereo(1000));
    CHECK_THROWS_AS(load_clip(path, c), InputError);
    std::filesystem::remove(path);
}

TEST_CASE("non-PCM16 audio is a codec error") {
    std::string bytes = encode_wav(stereo(100));
    bytes[20] = 3;  // IEEE float format tag
    CHECK_THROWS_AS(decode_wav(bytes), CodecError);
    bytes = encode_wav(stereo(100));
    bytes[34] = 24;
    CHECK_THROWS_AS(decode_wav(bytes), CodecError);
    CHECK_THROWS_AS(decode_wav("not a wav file"), AudioError);
}

TEST_CASE("wav sample extremes") {
    WavData w;
    w.sample_rate_hz = 16000;
    w.channels = {{-1.0f, 1.0f, 0.5f}, {0.0f, -0.5f, 2.0f}};
    const WavData back = decode_wav(encode_wav(w));
    CHECK(back.channels[0][0] == -1.0f);
    CHECK(back.channels[0][1] == 32767.0f / 32768.0f);
    CHECK(back.channels[0][2] == 0.5f);
    CHECK(back.channels[1][2] == 32767.0f / 32768.0f);
}

TEST_CASE("score files") {
    const std::string text =
        "clip_id,true_label,s_backchannel,s_failed,s_interruption,s_laughter\n"
        "a,failed_interruption,0.1,0.7,0.1,0.1\n"
        "b,backchannel,0.6,0.2,0.1,0.1\n";
    const auto clips = parse_scores(text);
    REQUIRE(clips.size() == 2);
    CHECK(clips[0].true_label == ClassLabel::failed_interruption);
    CHECK(clips[0].scores[1] == 0.7f);
    CHECK(parse_scores(format_scores(clips))[1].scores[0] == 0.6f);
    CHECK_THROWS_AS(parse_scores("a,b\n"), ParseError);
    CHECK_THROWS_AS(parse_scores(text + "c,cough,0,0,0,0\n"), ParseError);
    CHECK_THROWS_AS(parse_scores(text + "c,laughter,0,0\n"), ParseError);
}

TEST_CASE("trace files") {
    const ActivityTrace t = parse_trace("# meeting\nlength 60\n0 0 10\n1 5 6\n0 12 13.5\n");
    CHECK(t.length_s == 60.0);
    REQUIRE(t.channels.size() == 2);
    CHECK(t.channels[0].size() == 2);
    CHECK(t.channels[1][0].start_s == 5.0);
    CHECK(parse_trace(format_trace(t)).channels[0][1].end_s == 13.5);
    CHECK_THROWS_AS(parse_trace("0 1\n"), ParseError);
    CHECK_THROWS_AS(parse_trace("0 3 2\n"), TraceError);
}

TEST_CASE("scenario files") {
    const EnergyScenario s = parse_scenario("users=1000\nactive_hours_per_year=100\n");
    CHECK(s.users == 1000.0);
    CHECK(s.model_watts_old == 4.84);
    const EnergyScenario back = parse_scenario(format_scenario(s));
    CHECK(back.active_hours_per_year == 100.0);
    CHECK_THROWS_AS(parse_scenario("watts=3\n"), ParseError);
    CHECK_THROWS_AS(parse_scenario("users=-3\n"), InputError);
}

}
