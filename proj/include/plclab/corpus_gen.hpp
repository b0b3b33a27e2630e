#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "plclab/audio.hpp"

namespace plclab {

/**
 * Deterministic synthetic solo-string material for desk-scale experiments:
 * phrases of sustained notes, each a sum of 6-10 harmonics over a
 * fundamental random-walking in 65-660 Hz, with vibrato, attack/release
 * envelopes, a gated low-level noise floor, and occasional true-silence
 * rests between phrases. 16 kHz mono.
 */
AudioBuffer generate_track(double seconds, uint64_t seed);

/// Write ceil(minutes / track_minutes) tracks into out_dir as
/// track_000.wav, track_001.wav, ... Returns the written paths.
std::vector<std::filesystem::path> generate_corpus(const std::filesystem::path& out_dir,
                                                   double minutes, uint64_t seed,
                                                   double track_minutes = 1.0);

}  // namespace plclab
