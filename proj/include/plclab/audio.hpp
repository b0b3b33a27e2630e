#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace plclab {

inline constexpr int kPacketSize = 128;
inline constexpr int kWorkingRate = 16000;
inline constexpr int kSourceRate = 48000;

/// Mono waveform with its sample rate. Samples are amplitudes in [-1, 1].
struct AudioBuffer {
    std::vector<double> samples;
    int sample_rate = kWorkingRate;

    size_t size() const { return samples.size(); }
    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

/// Largest absolute sample value; 0 for an empty span.
double peak_amplitude(std::span<const double> samples);

/**
 * Scale a buffer so its peak amplitude is exactly 1 and return the applied
 * gain. All-zero (or empty) input is returned unchanged with gain 1; inputs
 * whose peak is already exactly 1 come back bit-identical.
 *
 * De-normalize by multiplying with 1/gain.
 */
std::pair<AudioBuffer, double> peak_normalize(const AudioBuffer& in);

/// Gain variant that operates on a raw span; returns the gain only.
double peak_gain(std::span<const double> samples);

}  // namespace plclab
