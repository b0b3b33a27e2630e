#include "plclab/audio.hpp"

#include <cmath>

namespace plclab {

double peak_amplitude(std::span<const double> samples) {
    double peak = 0.0;
    for (double s : samples) peak = std::max(peak, std::abs(s));
    return peak;
}

double peak_gain(std::span<const double> samples) {
    const double peak = peak_amplitude(samples);
    return peak > 0.0 ? 1.0 / peak : 1.0;
}

std::pair<AudioBuffer, double> peak_normalize(const AudioBuffer& in) {
    const double peak = peak_amplitude(in.samples);
    if (peak == 0.0 || peak == 1.0) return {in, 1.0};
    AudioBuffer out;
    out.sample_rate = in.sample_rate;
    out.samples.resize(in.samples.size());
    // dividing by the peak (rather than multiplying by 1/peak) makes the
    // peak sample come out as exactly 1
    for (size_t i = 0; i < in.samples.size(); ++i) out.samples[i] = in.samples[i] / peak;
    return {std::move(out), 1.0 / peak};
}

}  // namespace plclab
