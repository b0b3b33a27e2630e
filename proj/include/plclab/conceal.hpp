#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "plclab/ar.hpp"
#include "plclab/audio.hpp"
#include "plclab/loss_pattern.hpp"
#include "plclab/weights_io.hpp"

namespace plclab {

/// Per-gap evaluation record. The MAE is computed against ground truth in
/// the normalized domain (the gap's 2 s context scaled to unity peak).
struct GapMetric {
    int64_t packet_index = 0;
    double mae = 0.0;
    double latency_s = 0.0;
};

struct ConcealmentResult {
    AudioBuffer concealed;
    std::vector<GapMetric> per_gap;
    std::string strategy_id;
};

/**
 * A concealment strategy fills one lost packet from the causally available
 * stream prefix (everything strictly before the gap, with earlier gaps
 * already concealed). Implementations never see samples at or after the gap.
 */
class ConcealStrategy {
public:
    virtual ~ConcealStrategy() = default;
    virtual std::string id() const = 0;
    virtual void conceal(std::span<const double> history, std::span<double> out) = 0;
};

/// Fills gaps with silence.
class MuteStrategy : public ConcealStrategy {
public:
    std::string id() const override { return "mute"; }
    void conceal(std::span<const double> history, std::span<double> out) override;
};

/// Repeats the previous packet verbatim (mute when there is none).
class RepeatStrategy : public ConcealStrategy {
public:
    std::string id() const override { return "repeat"; }
    void conceal(std::span<const double> history, std::span<double> out) override;
};

/// Fits an AR(p) model on the last `history_len` samples and rolls it out.
/// Falls back to repeat-last when the history cannot support the fit.
class ArStrategy : public ConcealStrategy {
public:
    ArStrategy(int history_len, int order, ArMethod method);
    std::string id() const override;
    void conceal(std::span<const double> history, std::span<double> out) override;

private:
    int history_len_;
    int order_;
    ArMethod method_;
};

/// Trained-model concealment: peak-normalize up to 8 s of history, build the
/// context tensor, run encoder + synthesizer, de-normalize the packet.
class NeuralStrategy : public ConcealStrategy {
public:
    explicit NeuralStrategy(ModelWeights weights);
    std::string id() const override { return "neural"; }
    void conceal(std::span<const double> history, std::span<double> out) override;

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Free-function forms of the trivial strategies.
std::vector<double> conceal_mute();
std::vector<double> conceal_repeat(std::span<const double> history);

/**
 * Stream simulation: walk the packets in order and replace each lost one
 * with the strategy's prediction, using only causally available data.
 * Samples outside lost packets pass through bit-exactly. Per-gap MAE is
 * recorded against the original signal, normalized by the gap's 2 s context
 * peak; latency is the wall time of the strategy call.
 */
ConcealmentResult conceal_stream(const AudioBuffer& audio, const LossPattern& pattern,
                                 ConcealStrategy& strategy);

/// Recompute per-gap MAE from (concealed, original, pattern); must match the
/// values recorded during conceal_stream exactly.
std::vector<GapMetric> recompute_gap_metrics(const AudioBuffer& concealed,
                                             const AudioBuffer& original,
                                             const LossPattern& pattern);

/// Mean of the per-gap MAE column (0 for no gaps).
double mean_mae(const std::vector<GapMetric>& gaps);
/// Sample standard deviation of per-gap MAE (0 for fewer than 2 gaps).
double std_mae(const std::vector<GapMetric>& gaps);

}  // namespace plclab
