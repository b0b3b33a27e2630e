#include "plclab/dataset.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "plclab/common.hpp"
#include "plclab/nn/network.hpp"
#include "plclab/rng.hpp"

namespace plclab {

std::vector<SampleWindow> choose_sample_windows(const std::vector<AudioBuffer>& corpus,
                                                double rate, uint64_t seed) {
    if (rate <= 0.0) throw UsageError("sampling rate must be positive");
    if (rate > 0.05) throw UsageError("sampling rate above 5% is not supported");
    if (corpus.empty()) throw DataError("empty corpus");

    const int64_t min_len = kContextHistorySamples + 2 * kPacketSize;
    std::vector<SampleWindow> out;
    for (size_t r = 0; r < corpus.size(); ++r) {
        const auto& rec = corpus[r];
        if (rec.sample_rate != 16000) throw DataError("corpus recordings must be 16 kHz");
        const int64_t len = static_cast<int64_t>(rec.samples.size());
        if (len < min_len)
            throw DataError("recording " + std::to_string(r) +
                            " too short (need at least 8 s + 2 packets)");
        const int64_t want = static_cast<int64_t>(
            std::floor(static_cast<double>(len) * rate / kPacketSize));
        if (want == 0) continue;

        // targets may start anywhere a previous valid packet exists
        const int64_t lo = kPacketSize;
        const int64_t hi = len - kPacketSize;  // inclusive range [lo, hi]
        Rng rng = Rng::fork(seed, r);
        std::set<int64_t> accepted;
        int64_t attempts = 0;
        const int64_t max_attempts = 200 * want + 1000;
        while (static_cast<int64_t>(accepted.size()) < want) {
            if (++attempts > max_attempts)
                throw DataError("could not place non-overlapping target windows (rate too high)");
            const int64_t s = lo + rng.uniform_int(hi - lo + 1);
            auto next = accepted.lower_bound(s);
            if (next != accepted.end() && *next - s < kPacketSize) continue;
            if (next != accepted.begin() && s - *std::prev(next) < kPacketSize) continue;
            accepted.insert(s);
        }
        for (int64_t s : accepted) {
            const int64_t ctx_begin = std::max<int64_t>(0, s - kContextHistorySamples);
            const double peak =
                peak_amplitude({rec.samples.data() + ctx_begin, static_cast<size_t>(s - ctx_begin)});
            out.push_back({static_cast<int>(r), s, peak > 0.0 ? 1.0 / peak : 1.0});
        }
    }
    if (out.empty()) throw DataError("corpus too short for the requested sampling rate");
    return out;
}

TrainingSample materialize_sample(const AudioBuffer& recording, const SampleWindow& w,
                                  ContextMode mode, const FeatureConfig& cfg) {
    const int64_t s = w.start;
    const int64_t ctx_begin = std::max<int64_t>(0, s - kContextHistorySamples);
    const double peak = w.gain > 0.0 ? 1.0 / w.gain : 0.0;

    AudioBuffer history;
    history.sample_rate = recording.sample_rate;
    history.samples.resize(static_cast<size_t>(s - ctx_begin));
    for (int64_t i = ctx_begin; i < s; ++i)
        history.samples[static_cast<size_t>(i - ctx_begin)] =
            peak > 0.0 ? recording.samples[static_cast<size_t>(i)] / peak
                       : recording.samples[static_cast<size_t>(i)];

    const ContextTensor ctx = build_context_tensor(history, mode, cfg);

    TrainingSample out;
    out.gain = static_cast<float>(w.gain);
    out.context = nn::pack_context<float>(ctx, cfg.n_mels, cfg.context_frames());
    for (int i = 0; i < kPacketSize; ++i) {
        const double prev = recording.samples[static_cast<size_t>(s - kPacketSize + i)];
        const double target = recording.samples[static_cast<size_t>(s + i)];
        out.prev_packet[static_cast<size_t>(i)] =
            static_cast<float>(peak > 0.0 ? prev / peak : prev);
        out.target_packet[static_cast<size_t>(i)] =
            static_cast<float>(peak > 0.0 ? target / peak : target);
    }
    return out;
}

std::vector<TrainingSample> extract_samples(const std::vector<AudioBuffer>& corpus, double rate,
                                            uint64_t seed, ContextMode mode,
                                            const FeatureConfig& cfg) {
    const std::vector<SampleWindow> windows = choose_sample_windows(corpus, rate, seed);
    std::vector<TrainingSample> out(windows.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int64_t i = 0; i < static_cast<int64_t>(windows.size()); ++i)
        out[static_cast<size_t>(i)] =
            materialize_sample(corpus[static_cast<size_t>(windows[static_cast<size_t>(i)].recording)],
                               windows[static_cast<size_t>(i)], mode, cfg);
    return out;
}

}  // namespace plclab
