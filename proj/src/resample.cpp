#include "plclab/resample.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "plclab/common.hpp"

namespace plclab {

namespace {

constexpr int kTaps = 127;
constexpr int kDelay = (kTaps - 1) / 2;  // 63 input samples, = 21 output samples
constexpr double kCutoverHz = 0.45 * 16000.0;

// Hann-windowed sinc low-pass, DC gain normalized to 1.
std::vector<double> design_lowpass() {
    std::vector<double> h(kTaps);
    const double fc = kCutoverHz / 48000.0;  // cycles per input sample
    double sum = 0.0;
    for (int k = 0; k < kTaps; ++k) {
        const double t = k - kDelay;
        const double x = 2.0 * fc * t;
        const double sinc = t == 0.0 ? 1.0 : std::sin(std::numbers::pi * x) / (std::numbers::pi * x);
        const double win =
            0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * k / (kTaps - 1));
        h[k] = 2.0 * fc * sinc * win;
        sum += h[k];
    }
    for (double& v : h) v /= sum;
    return h;
}

}  // namespace

AudioBuffer resample_48k_to_16k(const AudioBuffer& in) {
    if (in.sample_rate != 48000)
        throw DataError("resample_48k_to_16k requires 48 kHz input");
    static const std::vector<double> h = design_lowpass();

    const int64_t n_in = static_cast<int64_t>(in.samples.size());
    const int64_t n_out = n_in / 3;
    AudioBuffer out;
    out.sample_rate = 16000;
    out.samples.resize(static_cast<size_t>(n_out));
    for (int64_t i = 0; i < n_out; ++i) {
        // group delay compensated: output i is aligned with input 3i
        const int64_t center = 3 * i + kDelay;
        double acc = 0.0;
        for (int k = 0; k < kTaps; ++k) {
            const int64_t j = center - k;
            if (j >= 0 && j < n_in) acc += h[k] * in.samples[static_cast<size_t>(j)];
        }
        out.samples[static_cast<size_t>(i)] = acc;
    }
    return out;
}

}  // namespace plclab
