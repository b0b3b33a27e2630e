#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plclab/audio.hpp"

namespace plclab {

/// Mel-spectrogram frontend parameters. The defaults are the working
/// configuration of the whole pipeline and are recorded in weight files so
/// inference always matches training.
struct FeatureConfig {
    int n_mels = 100;
    int win_ms = 30;   // 480 samples at 16 kHz
    int hop_ms = 10;   // 160 samples
    int sample_rate = 16000;
    int fft_size = 512;
    double fmin_hz = 0.0;
    double fmax_hz = 8000.0;
    double log_floor = 1e-5;  // value = log(log_floor + magnitude)

    int win_length() const { return win_ms * sample_rate / 1000; }
    int hop_length() const { return hop_ms * sample_rate / 1000; }
    int context_frames() const { return 200; }
    int context_samples() const { return context_frames() * hop_length(); }
    double silence_floor() const;  // log(log_floor), the all-zero frame value
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

/**
 * Triangular mel filterbank over the non-negative FFT bins, filters spaced
 * uniformly on the mel scale between fmin and fmax, each scaled by
 * 2 / (right_edge - left_edge) so all triangles carry equal area.
 * Rows are stored banded (first bin + weights) since each filter only
 * touches a narrow range of bins.
 */
class MelFilterbank {
public:
    explicit MelFilterbank(const FeatureConfig& cfg);

    int n_mels() const { return static_cast<int>(first_bin_.size()); }
    int n_bins() const { return n_bins_; }

    /// out[m] = sum_k weight[m][k] * spectrum[k]; out must hold n_mels values.
    void apply(const double* magnitude_spectrum, double* out) const;

    /// Dense weight of filter m at FFT bin k (0 outside the band). Test hook.
    double weight(int m, int k) const;

    /// Center frequency of filter m in Hz.
    double center_hz(int m) const { return center_hz_[m]; }

private:
    int n_bins_;
    std::vector<int> first_bin_;
    std::vector<std::vector<double>> band_;
    std::vector<double> center_hz_;
};

/// 100 x 200 grid of log-compressed mel magnitudes, row-major [mel][frame].
struct MelFrameMatrix {
    int n_mels = 0;
    int n_frames = 0;
    std::vector<double> values;

    double& at(int mel, int frame) { return values[static_cast<size_t>(mel) * n_frames + frame]; }
    double at(int mel, int frame) const { return values[static_cast<size_t>(mel) * n_frames + frame]; }
};

/**
 * Mel-spectrogram of exactly 2 s of 16 kHz audio (32000 samples).
 *
 * The signal is left-padded with 320 zeros so that 200 frames of 480 samples
 * at hop 160 exist and the final frame ends exactly at the last received
 * sample. Frames are Hann-windowed, zero-padded to fft_size, and the
 * magnitude spectrum is mapped through the filterbank and compressed as
 * log(log_floor + m). Throws DataError on wrong length or sample rate.
 */
MelFrameMatrix mel_spectrogram(const AudioBuffer& audio, const FeatureConfig& cfg);

enum class ContextMode : uint8_t {
    kMultiScale = 0,   // channels carry 2 s / 4 s / 8 s at decimation 1 / 2 / 4
    kReplicated2s = 1, // the 2 s matrix replicated into all three channels
};

std::string to_string(ContextMode mode);
ContextMode context_mode_from_string(const std::string& s);

/// Stacked spectro-temporal history, shape 3 x 100 x 200.
struct ContextTensor {
    std::array<MelFrameMatrix, 3> channels;
    ContextMode mode = ContextMode::kMultiScale;
};

/**
 * Build the encoder input from the most recent received audio, which must
 * end at the sample just before the missing packet. Histories shorter than
 * 8 s (or 2 s in replicated mode) are left-padded with silence. Channel k of
 * the multi-scale tensor covers the last 2^(k+1) s, computed at hop 160 and
 * time-decimated by 2^k keeping the newest frame.
 */
ContextTensor build_context_tensor(const AudioBuffer& history, ContextMode mode,
                                   const FeatureConfig& cfg);

}  // namespace plclab
