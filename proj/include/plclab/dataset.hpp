#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "plclab/audio.hpp"
#include "plclab/mel.hpp"

namespace plclab {

/// Chosen target window before feature materialization: recording index,
/// first sample of the target packet, and the context normalization gain.
struct SampleWindow {
    int recording = 0;
    int64_t start = 0;  // first sample of the target packet
    double gain = 1.0;
};

/// One training example. The context tensor is stored in the engine's flat
/// [channel][mel][frame] float layout; prev/target are peak-normalized by
/// the same gain as the context.
struct TrainingSample {
    std::vector<float> context;
    std::array<float, kPacketSize> prev_packet;
    std::array<float, kPacketSize> target_packet;
    float gain = 1.0f;
};

inline constexpr int64_t kContextHistorySamples = 8 * 16000;  // 8 s

/**
 * Draw non-overlapping target windows uniformly at random over each
 * recording, at arbitrary sample offsets (not packet-aligned). Each
 * recording i contributes floor(len_i * rate / packet) windows, drawn from
 * an independent seeded stream, so the selection covers `rate` of the
 * corpus. Gains are the peak normalization of the (up to) 8 s context ending
 * where the target starts. Windows are sorted by (recording, start).
 *
 * Preconditions: 0 < rate <= 0.05; every recording is at least
 * 8 s + 2 packets long and sampled at 16 kHz.
 */
std::vector<SampleWindow> choose_sample_windows(const std::vector<AudioBuffer>& corpus,
                                                double rate, uint64_t seed);

/// Materialize context tensors (mode-dependent) for the chosen windows.
std::vector<TrainingSample> extract_samples(const std::vector<AudioBuffer>& corpus, double rate,
                                            uint64_t seed, ContextMode mode,
                                            const FeatureConfig& cfg);

/// Single-window materialization (shared with extract_samples and tests).
TrainingSample materialize_sample(const AudioBuffer& recording, const SampleWindow& w,
                                  ContextMode mode, const FeatureConfig& cfg);

}  // namespace plclab
