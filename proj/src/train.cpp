#include "plclab/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "plclab/common.hpp"
#include "plclab/nn/adam.hpp"
#include "plclab/nn/engine.hpp"
#include "plclab/nn/loss.hpp"

namespace plclab {

double lr_at(int epoch, int total_epochs, double lr_start, double lr_end) {
    if (total_epochs <= 1) return lr_start;
    const double frac = static_cast<double>(epoch) / (total_epochs - 1);
    return lr_start * std::pow(lr_end / lr_start, frac);
}

namespace {

using nn::MatX;

// Mean weighted-L1 over a batch; fills grad (scaled by 1/batch) if non-null.
float batch_loss(const MatX<float>& pred, const float* const* targets, int batch,
                 const std::vector<float>& w, MatX<float>* grad) {
    const int n = static_cast<int>(pred.rows());
    double total = 0.0;
    for (int b = 0; b < batch; ++b) {
        const float* p = pred.col(b).data();
        const float* t = targets[b];
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            const float d = p[k] - t[k];
            acc += static_cast<double>(w[static_cast<size_t>(k)]) * std::abs(d);
            if (grad) {
                const float s = d > 0 ? 1.0f : (d < 0 ? -1.0f : 0.0f);
                (*grad)(k, b) = w[static_cast<size_t>(k)] * s / (n * batch);
            }
        }
        total += acc / n;
    }
    return static_cast<float>(total / batch);
}

}  // namespace

TrainResult train(const std::vector<TrainingSample>& samples, const TrainConfig& cfg,
                  const FeatureConfig& features) {
    if (samples.size() < 2) throw DataError("need at least 2 samples to train");
    if (cfg.epochs < 1) throw UsageError("epochs must be >= 1");
    if (cfg.batch_size < 1) throw UsageError("batch size must be >= 1");

    const int n = static_cast<int>(samples.size());
    int n_val = static_cast<int>(std::lround(n * cfg.val_fraction));
    n_val = std::clamp(n_val, 1, n - 1);

    // seeded split: shuffle indices once, validation takes the tail
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng split_rng = Rng::fork(cfg.seed, 101);
    split_rng.shuffle(order);
    std::vector<int> train_idx(order.begin(), order.end() - n_val);
    std::vector<int> val_idx(order.end() - n_val, order.end());

    // model
    auto enc = nn::make_encoder<float>(3, 64, 512, features.n_mels, features.context_frames());
    auto synth = nn::make_synthesizer<float>(kPacketSize, 512, 1024);
    Rng init_rng = Rng::fork(cfg.seed, 202);
    nn::init_params(enc, synth, init_rng);
    auto genc = nn::make_encoder<float>(3, 64, 512, features.n_mels, features.context_frames());
    auto gsynth = nn::make_synthesizer<float>(kPacketSize, 512, 1024);
    const auto params = nn::param_views(enc, synth);
    const auto grads = nn::param_views(genc, gsynth);
    auto adam = nn::AdamState<float>::make(params);

    const int B = cfg.batch_size;
    nn::EncoderBatchWork<float> enc_work;
    nn::resize_encoder_work(enc, B, enc_work);
    nn::SynthBatchWork<float> synth_work;
    const std::vector<float> loss_w = nn::inverse_hann_weights<float>(kPacketSize);

    std::vector<const float*> ctx_ptrs(static_cast<size_t>(B));
    std::vector<const float*> tgt_ptrs(static_cast<size_t>(B));
    MatX<float> prev(kPacketSize, B), gout(kPacketSize, B), grad_latent;

    auto run_batch = [&](const std::vector<int>& idx, int from, int count,
                         bool learn) -> float {
        for (int b = 0; b < count; ++b) {
            const TrainingSample& s = samples[static_cast<size_t>(idx[static_cast<size_t>(from + b)])];
            ctx_ptrs[static_cast<size_t>(b)] = s.context.data();
            tgt_ptrs[static_cast<size_t>(b)] = s.target_packet.data();
            std::copy(s.prev_packet.begin(), s.prev_packet.end(), prev.col(b).data());
        }
        nn::encoder_forward_batch(enc, ctx_ptrs.data(), count, enc_work);
        nn::synthesizer_forward_batch(synth, prev, enc_work.latent, count, synth_work);
        if (!learn) return batch_loss(synth_work.out, tgt_ptrs.data(), count, loss_w, nullptr);

        gout.resize(kPacketSize, count);
        const float loss = batch_loss(synth_work.out, tgt_ptrs.data(), count, loss_w, &gout);
        nn::synthesizer_backward_batch(synth, gout, synth_work, gsynth, &grad_latent);
        nn::encoder_backward_batch(enc, grad_latent, count, enc_work, genc);
        return loss;
    };

    Rng shuffle_rng = Rng::fork(cfg.seed, 303);
    TrainResult result;
    result.best_epoch = -1;
    double best_val = std::numeric_limits<double>::infinity();
    ModelWeights best;
    best.enc = enc;
    best.synth = synth;

    for (int e = 0; e < cfg.epochs; ++e) {
        const double lr = lr_at(e, cfg.epochs, cfg.lr_start, cfg.lr_end);
        shuffle_rng.shuffle(train_idx);

        double train_acc = 0.0;
        int64_t seen = 0;
        for (int from = 0; from < static_cast<int>(train_idx.size()); from += B) {
            const int count = std::min<int>(B, static_cast<int>(train_idx.size()) - from);
            const float loss = run_batch(train_idx, from, count, true);
            if (!std::isfinite(loss))
                throw NumericError("training diverged (non-finite loss) at epoch " +
                                   std::to_string(e));
            nn::adam_step(params, grads, adam, lr);
            train_acc += static_cast<double>(loss) * count;
            seen += count;
        }
        const double train_loss = train_acc / static_cast<double>(seen);

        double val_acc = 0.0;
        for (int from = 0; from < static_cast<int>(val_idx.size()); from += B) {
            const int count = std::min<int>(B, static_cast<int>(val_idx.size()) - from);
            val_acc += static_cast<double>(run_batch(val_idx, from, count, false)) * count;
        }
        const double val_loss = val_acc / static_cast<double>(val_idx.size());

        result.history.push_back({e, lr, train_loss, val_loss});
        if (val_loss < best_val) {
            best_val = val_loss;
            result.best_epoch = e;
            best.enc = enc;
            best.synth = synth;
        }
        if (cfg.verbose)
            std::fprintf(stderr, "epoch %3d  lr %.3e  train %.6f  val %.6f%s\n", e, lr,
                         train_loss, val_loss, result.best_epoch == e ? "  *" : "");
    }

    best.meta.mode = cfg.mode;
    best.meta.features = features;
    best.meta.epochs = cfg.epochs;
    best.meta.best_epoch = result.best_epoch;
    best.meta.seed = cfg.seed;
    best.meta.batch_size = cfg.batch_size;
    best.meta.val_fraction = cfg.val_fraction;
    best.meta.n_samples = n;
    result.weights = std::move(best);
    return result;
}

}  // namespace plclab
