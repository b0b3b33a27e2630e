#include "plclab/mel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plclab/common.hpp"
#include "plclab/fft.hpp"

namespace plclab {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

double FeatureConfig::silence_floor() const { return std::log(log_floor); }

MelFilterbank::MelFilterbank(const FeatureConfig& cfg) {
    n_bins_ = cfg.fft_size / 2 + 1;
    const int n_mels = cfg.n_mels;
    const double bin_hz = static_cast<double>(cfg.sample_rate) / cfg.fft_size;

    // n_mels + 2 points uniform on the mel scale; filter m spans
    // [edge(m-1), edge(m+1)] with its peak at edge(m)
    std::vector<double> edge_hz(n_mels + 2);
    const double mel_lo = hz_to_mel(cfg.fmin_hz);
    const double mel_hi = hz_to_mel(cfg.fmax_hz);
    for (int i = 0; i < n_mels + 2; ++i)
        edge_hz[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

    first_bin_.resize(n_mels);
    band_.resize(n_mels);
    center_hz_.resize(n_mels);
    for (int m = 0; m < n_mels; ++m) {
        const double left = edge_hz[m], center = edge_hz[m + 1], right = edge_hz[m + 2];
        center_hz_[m] = center;
        const double area_norm = 2.0 / (right - left);
        const int k0 = std::max(0, static_cast<int>(std::ceil(left / bin_hz)));
        const int k1 = std::min(n_bins_ - 1, static_cast<int>(std::floor(right / bin_hz)));
        first_bin_[m] = k0;
        for (int k = k0; k <= k1; ++k) {
            const double f = k * bin_hz;
            double w = 0.0;
            if (f >= left && f <= center && center > left)
                w = (f - left) / (center - left);
            else if (f > center && f <= right && right > center)
                w = (right - f) / (right - center);
            band_[m].push_back(w * area_norm);
        }
    }
}

void MelFilterbank::apply(const double* magnitude_spectrum, double* out) const {
    for (int m = 0; m < n_mels(); ++m) {
        double acc = 0.0;
        const int k0 = first_bin_[m];
        for (size_t i = 0; i < band_[m].size(); ++i) acc += band_[m][i] * magnitude_spectrum[k0 + i];
        out[m] = acc;
    }
}

double MelFilterbank::weight(int m, int k) const {
    const int k0 = first_bin_[m];
    if (k < k0 || k >= k0 + static_cast<int>(band_[m].size())) return 0.0;
    return band_[m][static_cast<size_t>(k - k0)];
}

namespace {

std::vector<double> hann_window(int n) {
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    return w;
}

// Shared mel frame computation: audio length must be n_frames * hop; the
// signal is left-padded by (win - hop) zeros so the last frame ends at the
// last sample.
MelFrameMatrix mel_frames(std::span<const double> audio, int n_frames, const FeatureConfig& cfg,
                          const MelFilterbank& fb, const Fft& fft) {
    const int win = cfg.win_length();
    const int hop = cfg.hop_length();
    const int pad = win - hop;
    if (static_cast<int64_t>(audio.size()) != static_cast<int64_t>(n_frames) * hop)
        throw DataError("mel_frames: audio length must equal n_frames * hop");

    static thread_local std::vector<double> frame;
    static thread_local std::vector<double> mags;
    frame.resize(win);
    mags.resize(static_cast<size_t>(cfg.fft_size / 2 + 1));
    const std::vector<double> window = hann_window(win);

    MelFrameMatrix out;
    out.n_mels = cfg.n_mels;
    out.n_frames = n_frames;
    out.values.resize(static_cast<size_t>(cfg.n_mels) * n_frames);

    std::vector<double> mel(cfg.n_mels);
    for (int t = 0; t < n_frames; ++t) {
        const int64_t start = static_cast<int64_t>(t) * hop - pad;  // in unpadded coords
        for (int i = 0; i < win; ++i) {
            const int64_t j = start + i;
            const double s = (j >= 0 && j < static_cast<int64_t>(audio.size()))
                                 ? audio[static_cast<size_t>(j)]
                                 : 0.0;
            frame[i] = s * window[i];
        }
        fft.real_magnitude(frame.data(), win, mags.data());
        fb.apply(mags.data(), mel.data());
        for (int m = 0; m < cfg.n_mels; ++m)
            out.at(m, t) = std::log(cfg.log_floor + mel[m]);
    }
    return out;
}

// Keep every `factor`-th frame counting backwards from the newest.
MelFrameMatrix decimate_frames(const MelFrameMatrix& in, int factor, int out_frames) {
    MelFrameMatrix out;
    out.n_mels = in.n_mels;
    out.n_frames = out_frames;
    out.values.resize(static_cast<size_t>(in.n_mels) * out_frames);
    for (int t = 0; t < out_frames; ++t) {
        const int src = in.n_frames - 1 - (out_frames - 1 - t) * factor;
        for (int m = 0; m < in.n_mels; ++m) out.at(m, t) = in.at(m, src);
    }
    return out;
}

// Most recent `n` samples, left-padded with zeros when history is shorter.
std::vector<double> tail_padded(const AudioBuffer& audio, int64_t n) {
    std::vector<double> out(static_cast<size_t>(n), 0.0);
    const int64_t have = std::min<int64_t>(n, static_cast<int64_t>(audio.samples.size()));
    std::copy(audio.samples.end() - have, audio.samples.end(), out.end() - have);
    return out;
}

}  // namespace

MelFrameMatrix mel_spectrogram(const AudioBuffer& audio, const FeatureConfig& cfg) {
    if (audio.sample_rate != cfg.sample_rate)
        throw DataError("mel_spectrogram: wrong sample rate");
    if (static_cast<int>(audio.samples.size()) != cfg.context_samples())
        throw DataError("mel_spectrogram: expected exactly 2 s of audio");
    const MelFilterbank fb(cfg);
    const Fft fft(cfg.fft_size);
    return mel_frames(audio.samples, cfg.context_frames(), cfg, fb, fft);
}

std::string to_string(ContextMode mode) {
    return mode == ContextMode::kMultiScale ? "multi" : "replicated-2s";
}

ContextMode context_mode_from_string(const std::string& s) {
    if (s == "multi" || s == "multi-scale") return ContextMode::kMultiScale;
    if (s == "replicated-2s" || s == "replicated") return ContextMode::kReplicated2s;
    throw UsageError("unknown context mode: " + s);
}

ContextTensor build_context_tensor(const AudioBuffer& history, ContextMode mode,
                                   const FeatureConfig& cfg) {
    if (history.sample_rate != cfg.sample_rate)
        throw DataError("build_context_tensor: wrong sample rate");
    const MelFilterbank fb(cfg);
    const Fft fft(cfg.fft_size);
    const int frames = cfg.context_frames();
    const int hop = cfg.hop_length();

    ContextTensor out;
    out.mode = mode;
    const std::vector<double> tail2 = tail_padded(history, static_cast<int64_t>(frames) * hop);
    out.channels[0] = mel_frames(tail2, frames, cfg, fb, fft);
    if (mode == ContextMode::kReplicated2s) {
        out.channels[1] = out.channels[0];
        out.channels[2] = out.channels[0];
        return out;
    }
    for (int c = 1; c < 3; ++c) {
        const int factor = 1 << c;  // 2, 4
        const int long_frames = frames * factor;
        const std::vector<double> tail =
            tail_padded(history, static_cast<int64_t>(long_frames) * hop);
        const MelFrameMatrix full = mel_frames(tail, long_frames, cfg, fb, fft);
        out.channels[c] = decimate_frames(full, factor, frames);
    }
    return out;
}

}  // namespace plclab
