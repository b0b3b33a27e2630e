#include "plclab/conceal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "plclab/common.hpp"
#include "plclab/mel.hpp"
#include "plclab/nn/network.hpp"

namespace plclab {

namespace {

constexpr int64_t kNeuralHistory = 8 * 16000;
constexpr int64_t kEvalContext = 2 * 16000;

double gap_mae(std::span<const double> pred, std::span<const double> truth, double gain) {
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - truth[i]);
    return gain * acc / static_cast<double>(pred.size());
}

// unity-peak normalization gain of the last 2 s before the gap
double eval_gain(std::span<const double> stream, int64_t gap_start) {
    const int64_t begin = std::max<int64_t>(0, gap_start - kEvalContext);
    const double peak =
        peak_amplitude(stream.subspan(static_cast<size_t>(begin),
                                      static_cast<size_t>(gap_start - begin)));
    return peak > 0.0 ? 1.0 / peak : 1.0;
}

}  // namespace

void MuteStrategy::conceal(std::span<const double>, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
}

std::vector<double> conceal_mute() { return std::vector<double>(kPacketSize, 0.0); }

void RepeatStrategy::conceal(std::span<const double> history, std::span<double> out) {
    const size_t n = out.size();
    if (history.size() < n) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    std::copy(history.end() - n, history.end(), out.begin());
}

std::vector<double> conceal_repeat(std::span<const double> history) {
    std::vector<double> out(kPacketSize);
    RepeatStrategy s;
    s.conceal(history, out);
    return out;
}

ArStrategy::ArStrategy(int history_len, int order, ArMethod method)
    : history_len_(history_len), order_(order), method_(method) {
    if (history_len != 1024 && history_len != 2048)
        throw UsageError("AR history preset must be 1024 or 2048 samples");
    if (order < 1 || order >= history_len)
        throw UsageError("AR order must be in [1, history)");
}

std::string ArStrategy::id() const {
    return "ar(p=" + std::to_string(order_) + ",h=" + std::to_string(history_len_) + "," +
           to_string(method_) + ")";
}

void ArStrategy::conceal(std::span<const double> history, std::span<double> out) {
    const size_t need = static_cast<size_t>(2 * order_ + 1);
    if (history.size() < need) {  // stream start: degrade gracefully
        RepeatStrategy fallback;
        fallback.conceal(history, out);
        return;
    }
    const size_t use = std::min<size_t>(history.size(), static_cast<size_t>(history_len_));
    const std::span<const double> tail = history.subspan(history.size() - use, use);
    const ArCoefficients model = method_ == ArMethod::kOls ? fit_ols(tail, order_)
                                                           : fit_yule_walker(tail, order_);
    const ForecastResult fc = forecast(model, tail, static_cast<int>(out.size()));
    std::copy(fc.samples.begin(), fc.samples.end(), out.begin());
}

struct NeuralStrategy::Impl {
    ModelWeights weights;
    nn::Network<float> net;
    explicit Impl(ModelWeights w) : weights(std::move(w)) {
        net.enc = weights.enc;
        net.synth = weights.synth;
    }
};

NeuralStrategy::NeuralStrategy(ModelWeights weights)
    : impl_(std::make_shared<Impl>(std::move(weights))) {}

void NeuralStrategy::conceal(std::span<const double> history, std::span<double> out) {
    const auto& meta = impl_->weights.meta;
    const size_t use = std::min<size_t>(history.size(), static_cast<size_t>(kNeuralHistory));
    AudioBuffer ctx_audio;
    ctx_audio.sample_rate = meta.features.sample_rate;
    ctx_audio.samples.assign(history.end() - use, history.end());

    const auto [normalized, gain] = peak_normalize(ctx_audio);
    const ContextTensor ctx = build_context_tensor(normalized, meta.mode, meta.features);

    std::vector<float> prev(static_cast<size_t>(kPacketSize), 0.0f);
    const size_t have = std::min<size_t>(normalized.samples.size(), prev.size());
    for (size_t i = 0; i < have; ++i)
        prev[prev.size() - have + i] =
            static_cast<float>(normalized.samples[normalized.samples.size() - have + i]);

    const std::vector<float> packet = impl_->net.predict_packet(ctx, prev);
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<double>(packet[i]) / gain;  // de-normalize
}

ConcealmentResult conceal_stream(const AudioBuffer& audio, const LossPattern& pattern,
                                 ConcealStrategy& strategy) {
    const int64_t n_packets = static_cast<int64_t>(audio.samples.size()) / pattern.packet_size;
    if (!pattern.lost.empty() && pattern.lost.back() >= n_packets)
        throw DataError("loss pattern extends past the end of the stream");
    if (!pattern.lost.empty() && pattern.lost.front() < 0)
        throw DataError("negative packet index in loss pattern");

    ConcealmentResult result;
    result.strategy_id = strategy.id();
    result.concealed = audio;
    auto& out = result.concealed.samples;

    for (int64_t idx : pattern.lost) {
        const int64_t start = idx * pattern.packet_size;
        // causal view: everything strictly before the gap, earlier gaps concealed
        const std::span<const double> history(out.data(), static_cast<size_t>(start));
        const std::span<double> gap(out.data() + start,
                                    static_cast<size_t>(pattern.packet_size));
        const auto t0 = std::chrono::steady_clock::now();
        strategy.conceal(history, gap);
        const auto t1 = std::chrono::steady_clock::now();

        const double gain = eval_gain({out.data(), out.size()}, start);
        const std::span<const double> truth(audio.samples.data() + start,
                                            static_cast<size_t>(pattern.packet_size));
        result.per_gap.push_back(
            {idx, gap_mae(gap, truth, gain), std::chrono::duration<double>(t1 - t0).count()});
    }
    return result;
}

std::vector<GapMetric> recompute_gap_metrics(const AudioBuffer& concealed,
                                             const AudioBuffer& original,
                                             const LossPattern& pattern) {
    std::vector<GapMetric> out;
    for (int64_t idx : pattern.lost) {
        const int64_t start = idx * pattern.packet_size;
        const double gain =
            eval_gain({concealed.samples.data(), concealed.samples.size()}, start);
        const std::span<const double> pred(concealed.samples.data() + start,
                                           static_cast<size_t>(pattern.packet_size));
        const std::span<const double> truth(original.samples.data() + start,
                                            static_cast<size_t>(pattern.packet_size));
        out.push_back({idx, gap_mae(pred, truth, gain), 0.0});
    }
    return out;
}

double mean_mae(const std::vector<GapMetric>& gaps) {
    if (gaps.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& g : gaps) acc += g.mae;
    return acc / static_cast<double>(gaps.size());
}

double std_mae(const std::vector<GapMetric>& gaps) {
    if (gaps.size() < 2) return 0.0;
    const double mean = mean_mae(gaps);
    double acc = 0.0;
    for (const auto& g : gaps) acc += (g.mae - mean) * (g.mae - mean);
    return std::sqrt(acc / static_cast<double>(gaps.size() - 1));
}

}  // namespace plclab
