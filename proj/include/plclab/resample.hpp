#pragma once

#include "plclab/audio.hpp"

namespace plclab {

/**
 * 3:1 decimation from 48 kHz to the 16 kHz working rate.
 *
 * The anti-alias filter is a 127-tap Hann-windowed sinc low-pass with cutoff
 * at 0.45 x 16 kHz = 7.2 kHz, applied with its group delay compensated so
 * output sample i is time-aligned with input sample 3i. Output length is
 * exactly floor(n/3).
 *
 * Throws DataError unless the input sample rate is 48000.
 */
AudioBuffer resample_48k_to_16k(const AudioBuffer& in);

}  // namespace plclab
