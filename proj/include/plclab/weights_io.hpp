#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "plclab/mel.hpp"
#include "plclab/nn/types.hpp"

namespace plclab {

/// Everything needed to rebuild the inference pipeline exactly as trained.
struct ModelMeta {
    ContextMode mode = ContextMode::kMultiScale;
    FeatureConfig features;
    int epochs = 0;
    int best_epoch = 0;
    uint64_t seed = 0;
    int batch_size = 32;
    double val_fraction = 0.1;
    int n_samples = 0;
};

struct ModelWeights {
    nn::EncoderParams<float> enc;
    nn::SynthesizerParams<float> synth;
    ModelMeta meta;
};

/**
 * Weight file layout (all integers little-endian):
 *   magic "PLCW" | u16 version | u32 header_len | header bytes |
 *   u64 float_count | payload float32 | u32 crc32
 * The header is UTF-8 "key=value\n" text carrying the feature config,
 * architecture dims and training metadata. The CRC covers every byte before
 * it. Parameter payload order matches nn::param_views.
 */
void save_weights(const ModelWeights& w, const std::filesystem::path& path);

/// Validates magic, version, checksum, and architecture dims (throws
/// DataError on any mismatch).
ModelWeights load_weights(const std::filesystem::path& path);

/// Raw header key/value pairs (for `inspect-weights`).
std::map<std::string, std::string> read_weights_header(const std::filesystem::path& path);

}  // namespace plclab
