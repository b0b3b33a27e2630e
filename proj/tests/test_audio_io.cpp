#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "plclab/audio.hpp"
#include "plclab/common.hpp"
#include "plclab/resample.hpp"
#include "plclab/rng.hpp"
#include "plclab/wav_io.hpp"

using namespace plclab;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("plclab_test_" + name);
}

// hand-assembled WAV so the loader is tested against raw bytes, not save_wav
void write_raw_wav(const std::filesystem::path& path, uint16_t format, uint16_t channels,
                   uint32_t rate, uint16_t bits, const std::vector<uint8_t>& payload) {
    std::vector<uint8_t> out;
    auto u32 = [&out](uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xFF);
    };
    auto u16 = [&out](uint16_t v) {
        out.push_back(v & 0xFF);
        out.push_back((v >> 8) & 0xFF);
    };
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    u32(36 + static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    u32(16);
    u16(format);
    u16(channels);
    u32(rate);
    u32(rate * channels * bits / 8);
    u16(static_cast<uint16_t>(channels * bits / 8));
    u16(bits);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    u32(static_cast<uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

std::vector<uint8_t> pcm16_bytes(const std::vector<int16_t>& v) {
    std::vector<uint8_t> out;
    for (int16_t s : v) {
        out.push_back(static_cast<uint16_t>(s) & 0xFF);
        out.push_back((static_cast<uint16_t>(s) >> 8) & 0xFF);
    }
    return out;
}

}  // namespace

TEST_CASE("load_wav scales 16-bit PCM linearly") {
    const auto path = temp_file("pcm16.wav");
    write_raw_wav(path, 1, 1, 16000, 16, pcm16_bytes({16384}));
    const AudioBuffer b = load_wav(path);
    CHECK(b.samples.size() == 1);
    CHECK(b.samples[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(b.sample_rate == 16000);
}

TEST_CASE("load_wav maps the most negative 16-bit value to -1") {
    const auto path = temp_file("pcm16_min.wav");
    write_raw_wav(path, 1, 1, 16000, 16, pcm16_bytes({-32768}));
    const AudioBuffer b = load_wav(path);
    CHECK(b.samples[0] == -1.0);
}

TEST_CASE("load_wav mixes stereo down by averaging") {
    const auto path = temp_file("stereo.wav");
    // 0.2 and 0.4 as 16-bit values
    const int16_t l = static_cast<int16_t>(std::lround(0.2 * 32768));
    const int16_t r = static_cast<int16_t>(std::lround(0.4 * 32768));
    write_raw_wav(path, 1, 2, 16000, 16, pcm16_bytes({l, r}));
    const AudioBuffer b = load_wav(path);
    CHECK(b.samples.size() == 1);
    CHECK(b.samples[0] == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("load_wav reads float32 files") {
    const auto path = temp_file("f32.wav");
    std::vector<uint8_t> payload(8);
    const float a = 0.25f, b = -0.75f;
    std::memcpy(payload.data(), &a, 4);
    std::memcpy(payload.data() + 4, &b, 4);
    write_raw_wav(path, 3, 1, 48000, 32, payload);
    const AudioBuffer buf = load_wav(path);
    CHECK(buf.sample_rate == 48000);
    CHECK(buf.samples[0] == doctest::Approx(0.25));
    CHECK(buf.samples[1] == doctest::Approx(-0.75));
}

TEST_CASE("load_wav rejects junk and unsupported encodings") {
    const auto path = temp_file("junk.wav");
    std::ofstream(path) << "definitely not a wav";
    CHECK_THROWS_AS(load_wav(path), DataError);
    CHECK_THROWS_AS(load_wav(temp_file("missing_file.wav")), DataError);
    const auto alaw = temp_file("alaw.wav");
    write_raw_wav(alaw, 6, 1, 8000, 8, {0x55});
    CHECK_THROWS_AS(load_wav(alaw), DataError);
    const auto empty = temp_file("empty.wav");
    write_raw_wav(empty, 1, 1, 16000, 16, {});
    CHECK_THROWS_AS(load_wav(empty), DataError);
}

TEST_CASE("save/load round-trip deviates at most one quantization step") {
    Rng rng(42);
    AudioBuffer b;
    b.sample_rate = 16000;
    for (int i = 0; i < 1000; ++i) b.samples.push_back(rng.uniform(-1.0, 1.0));
    const auto path = temp_file("roundtrip.wav");
    const auto stats = save_wav(b, path);
    CHECK(stats.clipped == 0);
    const AudioBuffer back = load_wav(path);
    REQUIRE(back.samples.size() == b.samples.size());
    double max_dev = 0.0;
    for (size_t i = 0; i < b.samples.size(); ++i)
        max_dev = std::max(max_dev, std::abs(back.samples[i] - b.samples[i]));
    CHECK(max_dev <= 1.0 / 32768.0);
}

TEST_CASE("save_wav rejects empty buffers and clamps out-of-range samples") {
    AudioBuffer empty;
    CHECK_THROWS_AS(save_wav(empty, temp_file("empty_out.wav")), DataError);

    AudioBuffer hot;
    hot.sample_rate = 16000;
    hot.samples = {2.0, 0.5, -3.0};
    const auto path = temp_file("clipped.wav");
    const auto stats = save_wav(hot, path);
    CHECK(stats.clipped == 2);
    const AudioBuffer back = load_wav(path);
    CHECK(back.samples[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(back.samples[2] == -1.0);
}

TEST_CASE("resample_48k_to_16k length and rate contract") {
    AudioBuffer b;
    b.sample_rate = 48000;
    b.samples.assign(48000, 0.0);
    const AudioBuffer out = resample_48k_to_16k(b);
    CHECK(out.samples.size() == 16000);
    CHECK(out.sample_rate == 16000);

    b.samples.assign(48001, 0.0);
    CHECK(resample_48k_to_16k(b).samples.size() == 16000);

    AudioBuffer wrong;
    wrong.sample_rate = 16000;
    wrong.samples.assign(100, 0.0);
    CHECK_THROWS_AS(resample_48k_to_16k(wrong), DataError);
}

TEST_CASE("resampler passes a 1 kHz tone through cleanly") {
    const int n = 48000;
    AudioBuffer b;
    b.sample_rate = 48000;
    b.samples.resize(n);
    for (int i = 0; i < n; ++i)
        b.samples[i] = std::sin(2.0 * std::numbers::pi * 1000.0 * i / 48000.0);
    const AudioBuffer out = resample_48k_to_16k(b);
    // oracle: the analytic tone sampled at 16 kHz; skip the filter transient
    double max_err = 0.0;
    for (size_t i = 30; i + 30 < out.samples.size(); ++i) {
        const double ref = std::sin(2.0 * std::numbers::pi * 1000.0 * (3.0 * i) / 48000.0);
        max_err = std::max(max_err, std::abs(out.samples[i] - ref));
    }
    CHECK(max_err < 0.01);
}

TEST_CASE("resampler attenuates content above the new Nyquist") {
    const int n = 48000;
    AudioBuffer b;
    b.sample_rate = 48000;
    b.samples.resize(n);
    double in_rms = 0.0;
    for (int i = 0; i < n; ++i) {
        b.samples[i] = std::sin(2.0 * std::numbers::pi * 20000.0 * i / 48000.0);
        in_rms += b.samples[i] * b.samples[i];
    }
    in_rms = std::sqrt(in_rms / n);
    const AudioBuffer out = resample_48k_to_16k(b);
    double out_rms = 0.0;
    for (double s : out.samples) out_rms += s * s;
    out_rms = std::sqrt(out_rms / static_cast<double>(out.samples.size()));
    CHECK(out_rms < 0.02 * in_rms);
}

TEST_CASE("resampler is linear for power-of-two gains") {
    Rng rng(7);
    AudioBuffer b;
    b.sample_rate = 48000;
    for (int i = 0; i < 9000; ++i) b.samples.push_back(rng.uniform(-1.0, 1.0));
    const AudioBuffer base = resample_48k_to_16k(b);
    for (const double a : {0.5, 1.0 / 1024.0}) {
        AudioBuffer scaled = b;
        for (double& s : scaled.samples) s *= a;
        const AudioBuffer out = resample_48k_to_16k(scaled);
        for (size_t i = 0; i < out.samples.size(); ++i)
            CHECK(std::abs(out.samples[i] - a * base.samples[i]) <= 1e-6);
    }
}

TEST_CASE("peak_normalize contract") {
    AudioBuffer b;
    b.sample_rate = 16000;
    b.samples = {0.25, -0.5};
    const auto [out, gain] = peak_normalize(b);
    CHECK(gain == doctest::Approx(2.0));
    CHECK(out.samples[0] == doctest::Approx(0.5));
    CHECK(out.samples[1] == -1.0);

    AudioBuffer zero;
    zero.sample_rate = 16000;
    zero.samples.assign(16, 0.0);
    const auto [zout, zgain] = peak_normalize(zero);
    CHECK(zgain == 1.0);
    CHECK(zout.samples == zero.samples);

    AudioBuffer unity;
    unity.sample_rate = 16000;
    unity.samples = {0.3, -1.0, 0.2};
    const auto [uout, ugain] = peak_normalize(unity);
    CHECK(ugain == 1.0);
    CHECK(uout.samples == unity.samples);
}

TEST_CASE("peak_normalize always reaches exactly unity peak") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        AudioBuffer b;
        b.sample_rate = 16000;
        const double scale = std::exp(rng.uniform(-8.0, 0.0));
        for (int i = 0; i < 64; ++i) b.samples.push_back(scale * rng.uniform(-1.0, 1.0));
        const auto [out, gain] = peak_normalize(b);
        CHECK(peak_amplitude(out.samples) == 1.0);
        CHECK(gain > 0.0);
    }
}
