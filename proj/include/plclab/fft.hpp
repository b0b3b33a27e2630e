#pragma once

#include <complex>
#include <vector>

namespace plclab {

/**
 * Iterative radix-2 complex FFT with precomputed twiddles. Size must be a
 * power of two. Small and deterministic; plenty fast for the 512-point
 * transforms used by the feature frontend.
 */
class Fft {
public:
    explicit Fft(int size);

    int size() const { return size_; }

    /// In-place forward transform of `size` complex values.
    void forward(std::complex<double>* data) const;

    /// Magnitude spectrum of a real frame (zero-padded to `size` if shorter).
    /// Writes size/2 + 1 values.
    void real_magnitude(const double* frame, int frame_len, double* mags) const;

private:
    int size_;
    int log2n_;
    std::vector<int> bitrev_;
    std::vector<std::complex<double>> twiddle_;
};

}  // namespace plclab
