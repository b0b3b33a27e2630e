#pragma once

#include <cstdint>
#include <vector>

#include "plclab/dataset.hpp"
#include "plclab/weights_io.hpp"

namespace plclab {

struct TrainConfig {
    int epochs = 100;
    int batch_size = 32;
    double val_fraction = 0.1;  // seeded split; at least one sample each side
    uint64_t seed = 0;
    ContextMode mode = ContextMode::kMultiScale;
    double lr_start = 1e-3;
    double lr_end = 1e-7;
    bool verbose = false;  // per-epoch stderr progress
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    ModelWeights weights;  // parameters at the best validation epoch
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

/// Geometric decay hitting lr_start at epoch 0 and lr_end at epoch total-1.
double lr_at(int epoch, int total_epochs, double lr_start, double lr_end);

/**
 * Mini-batch Adam training of the encoder + synthesizer on the weighted L1
 * packet loss. Deterministic for a fixed seed: the split, the per-epoch
 * shuffles and the weight init all derive from cfg.seed. Throws NumericError
 * if the training loss turns non-finite.
 */
TrainResult train(const std::vector<TrainingSample>& samples, const TrainConfig& cfg,
                  const FeatureConfig& features);

}  // namespace plclab
