#include "plclab/fft.hpp"

#include <cmath>
#include <numbers>

#include "plclab/common.hpp"

namespace plclab {

Fft::Fft(int size) : size_(size) {
    if (size < 2 || (size & (size - 1)) != 0)
        throw UsageError("FFT size must be a power of two");
    log2n_ = 0;
    while ((1 << log2n_) < size) ++log2n_;
    bitrev_.resize(size);
    for (int i = 0; i < size; ++i) {
        int r = 0;
        for (int b = 0; b < log2n_; ++b) r |= ((i >> b) & 1) << (log2n_ - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(size / 2);
    for (int k = 0; k < size / 2; ++k) {
        const double a = -2.0 * std::numbers::pi * k / size;
        twiddle_[k] = {std::cos(a), std::sin(a)};
    }
}

void Fft::forward(std::complex<double>* data) const {
    for (int i = 0; i < size_; ++i) {
        const int j = bitrev_[i];
        if (j > i) std::swap(data[i], data[j]);
    }
    for (int len = 2; len <= size_; len <<= 1) {
        const int half = len >> 1;
        const int step = size_ / len;
        for (int start = 0; start < size_; start += len) {
            for (int k = 0; k < half; ++k) {
                const std::complex<double> w = twiddle_[k * step];
                const std::complex<double> u = data[start + k];
                const std::complex<double> t = w * data[start + k + half];
                data[start + k] = u + t;
                data[start + k + half] = u - t;
            }
        }
    }
}

void Fft::real_magnitude(const double* frame, int frame_len, double* mags) const {
    if (frame_len > size_) throw UsageError("frame longer than FFT size");
    std::vector<std::complex<double>> buf(static_cast<size_t>(size_));
    for (int i = 0; i < frame_len; ++i) buf[i] = {frame[i], 0.0};
    forward(buf.data());
    for (int k = 0; k <= size_ / 2; ++k) mags[k] = std::abs(buf[k]);
}

}  // namespace plclab
