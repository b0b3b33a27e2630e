#pragma once

#include <cstddef>
#include <filesystem>

#include "plclab/audio.hpp"

namespace plclab {

/**
 * Read a RIFF/WAVE file. Accepted sample encodings are 16-bit PCM and 32-bit
 * IEEE float (plain or WAVE_FORMAT_EXTENSIBLE). Multichannel content is mixed
 * down to mono by averaging the channels. 16-bit values v map to v/32768;
 * float samples are clamped to [-1, 1].
 *
 * Throws DataError for unreadable files, unsupported encodings or
 * zero-length audio.
 */
AudioBuffer load_wav(const std::filesystem::path& path);

struct WavSaveStats {
    size_t clipped = 0;  // samples outside [-1, 1] clamped on write
};

/**
 * Write mono 16-bit PCM. Out-of-range samples are clamped to [-1, 1] and
 * counted in the returned stats. Throws DataError for empty buffers or
 * unwritable paths.
 */
WavSaveStats save_wav(const AudioBuffer& buffer, const std::filesystem::path& path);

}  // namespace plclab
