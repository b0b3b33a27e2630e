#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "plclab/common.hpp"
#include "plclab/fft.hpp"
#include "plclab/mel.hpp"
#include "plclab/rng.hpp"

using namespace plclab;

namespace {

AudioBuffer tone(double hz, int n, int rate = 16000, double amp = 1.0) {
    AudioBuffer b;
    b.sample_rate = rate;
    b.samples.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        b.samples[static_cast<size_t>(i)] =
            amp * std::sin(2.0 * std::numbers::pi * hz * i / rate);
    return b;
}

// oracle: quadratic-time DFT magnitude
std::vector<double> dft_magnitude(const std::vector<double>& x, int fft_size) {
    std::vector<double> mags(static_cast<size_t>(fft_size / 2 + 1));
    for (int k = 0; k <= fft_size / 2; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (size_t n = 0; n < x.size(); ++n) {
            const double a = -2.0 * std::numbers::pi * k * static_cast<double>(n) / fft_size;
            acc += x[n] * std::complex<double>(std::cos(a), std::sin(a));
        }
        mags[static_cast<size_t>(k)] = std::abs(acc);
    }
    return mags;
}

}  // namespace

TEST_CASE("FFT magnitude matches a direct DFT") {
    Rng rng(11);
    std::vector<double> x(480);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const Fft fft(512);
    std::vector<double> fast(257);
    fft.real_magnitude(x.data(), 480, fast.data());
    const std::vector<double> slow = dft_magnitude(x, 512);
    for (int k = 0; k <= 256; ++k)
        CHECK(fast[static_cast<size_t>(k)] ==
              doctest::Approx(slow[static_cast<size_t>(k)]).epsilon(1e-9).scale(1.0));
}

TEST_CASE("feature config pins the working geometry") {
    const FeatureConfig cfg;
    CHECK(cfg.win_length() == 480);
    CHECK(cfg.hop_length() == 160);
    CHECK(cfg.context_samples() == 32000);
    CHECK(cfg.n_mels == 100);
}

TEST_CASE("mel_spectrogram of silence sits exactly at the log floor") {
    const FeatureConfig cfg;
    AudioBuffer b;
    b.sample_rate = 16000;
    b.samples.assign(32000, 0.0);
    const MelFrameMatrix m = mel_spectrogram(b, cfg);
    CHECK(m.n_mels == 100);
    CHECK(m.n_frames == 200);
    for (double v : m.values) CHECK(v == cfg.silence_floor());
}

TEST_CASE("mel_spectrogram validates shape contracts") {
    const FeatureConfig cfg;
    AudioBuffer b;
    b.sample_rate = 16000;
    b.samples.assign(16000, 0.0);
    CHECK_THROWS_AS(mel_spectrogram(b, cfg), DataError);
    b.samples.assign(32000, 0.0);
    b.sample_rate = 48000;
    CHECK_THROWS_AS(mel_spectrogram(b, cfg), DataError);
}

TEST_CASE("a 1 kHz tone peaks in the mel bin nearest 1 kHz in every frame") {
    const FeatureConfig cfg;
    const MelFilterbank fb(cfg);

    // oracle: windowed DFT of one full-signal frame through the same bank
    const AudioBuffer sig = tone(1000.0, 32000);
    std::vector<double> frame(480);
    for (int i = 0; i < 480; ++i) {
        const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / 479.0);
        frame[static_cast<size_t>(i)] = sig.samples[static_cast<size_t>(16000 + i)] * w;
    }
    const std::vector<double> mags = dft_magnitude(frame, 512);
    std::vector<double> mel(100);
    fb.apply(mags.data(), mel.data());
    int oracle_bin = 0;
    for (int m = 1; m < 100; ++m)
        if (mel[static_cast<size_t>(m)] > mel[static_cast<size_t>(oracle_bin)]) oracle_bin = m;

    // the oracle bin is the one whose center frequency is nearest 1 kHz
    int nearest = 0;
    for (int m = 1; m < 100; ++m)
        if (std::abs(fb.center_hz(m) - 1000.0) < std::abs(fb.center_hz(nearest) - 1000.0))
            nearest = m;
    CHECK(oracle_bin == nearest);

    const MelFrameMatrix spec = mel_spectrogram(sig, cfg);
    for (int t = 0; t < spec.n_frames; ++t) {
        int argmax = 0;
        for (int m = 1; m < spec.n_mels; ++m)
            if (spec.at(m, t) > spec.at(argmax, t)) argmax = m;
        CHECK(argmax == oracle_bin);
    }
}

TEST_CASE("every interior FFT bin is covered by some mel filter") {
    const FeatureConfig cfg;
    const MelFilterbank fb(cfg);
    const double bin_hz = 16000.0 / 512.0;
    for (int k = 0; k <= 256; ++k) {
        const double f = k * bin_hz;
        if (f <= cfg.fmin_hz || f >= cfg.fmax_hz) continue;
        double total = 0.0;
        for (int m = 0; m < 100; ++m) total += fb.weight(m, k);
        CHECK_MESSAGE(total > 0.0, "spectral hole at bin ", k, " (", f, " Hz)");
    }
}

TEST_CASE("shifting input by one hop shifts frames by one column") {
    Rng rng(5);
    std::vector<double> x(32160);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const FeatureConfig cfg;
    AudioBuffer a, b;
    a.sample_rate = b.sample_rate = 16000;
    a.samples.assign(x.begin(), x.begin() + 32000);
    b.samples.assign(x.begin() + 160, x.begin() + 32160);
    const MelFrameMatrix ma = mel_spectrogram(a, cfg);
    const MelFrameMatrix mb = mel_spectrogram(b, cfg);
    // columns fed purely by real audio must match bit-for-bit
    for (int t = 2; t < 199; ++t)
        for (int m = 0; m < 100; ++m) CHECK(mb.at(m, t) == ma.at(m, t + 1));
}

TEST_CASE("build_context_tensor multi-scale channels differ and have fixed shape") {
    AudioBuffer hist = tone(220.0, 8 * 16000);
    // make the far past distinguishable from the recent past
    for (size_t i = 0; i < 64000; ++i) hist.samples[i] *= 0.05;
    const FeatureConfig cfg;
    const ContextTensor ctx = build_context_tensor(hist, ContextMode::kMultiScale, cfg);
    for (const auto& ch : ctx.channels) {
        CHECK(ch.n_mels == 100);
        CHECK(ch.n_frames == 200);
    }
    CHECK(ctx.channels[0].values != ctx.channels[1].values);
    CHECK(ctx.channels[1].values != ctx.channels[2].values);
}

TEST_CASE("replicated mode copies channel 0 into all channels") {
    AudioBuffer hist = tone(330.0, 3 * 16000);
    const FeatureConfig cfg;
    const ContextTensor ctx = build_context_tensor(hist, ContextMode::kReplicated2s, cfg);
    CHECK(ctx.channels[1].values == ctx.channels[0].values);
    CHECK(ctx.channels[2].values == ctx.channels[0].values);
}

TEST_CASE("one second of history leaves the older half at the silence floor") {
    const FeatureConfig cfg;
    AudioBuffer hist = tone(440.0, 16000);
    const ContextTensor ctx = build_context_tensor(hist, ContextMode::kMultiScale, cfg);
    const auto& ch0 = ctx.channels[0];
    for (int t = 0; t < 100; ++t)
        for (int m = 0; m < 100; ++m) CHECK(ch0.at(m, t) == cfg.silence_floor());
    // and the newest column carries energy
    double newest = 0.0;
    for (int m = 0; m < 100; ++m) newest = std::max(newest, ch0.at(m, 199) - cfg.silence_floor());
    CHECK(newest > 1.0);
}

TEST_CASE("decimated long contexts keep the newest frame") {
    // a click in the final hop must appear in the last column of all channels
    const FeatureConfig cfg;
    AudioBuffer hist;
    hist.sample_rate = 16000;
    hist.samples.assign(8 * 16000, 0.0);
    for (int i = 0; i < 160; ++i)
        hist.samples[hist.samples.size() - 1 - static_cast<size_t>(i)] = 0.9;
    const ContextTensor ctx = build_context_tensor(hist, ContextMode::kMultiScale, cfg);
    for (const auto& ch : ctx.channels) {
        double energy = 0.0;
        for (int m = 0; m < 100; ++m) energy += ch.at(m, 199) - cfg.silence_floor();
        CHECK(energy > 1.0);
    }
}
