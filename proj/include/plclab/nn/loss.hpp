#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "plclab/common.hpp"

namespace plclab::nn {

/**
 * Inverse-Hann loss weights w[k] = 1 - sin^2(pi k / (n-1)), k = 0..n-1.
 * Maximal (exactly 1) at both packet edges and minimal at the center, so the
 * loss concentrates on the samples that stitch the packet into the stream.
 */
template <class T>
std::vector<T> inverse_hann_weights(int n) {
    std::vector<T> w(n);
    for (int k = 0; k < n; ++k) {
        const double s = std::sin(M_PI * k / (n - 1));
        w[k] = static_cast<T>(1.0 - s * s);
    }
    return w;
}

/**
 * loss = (1/n) sum_k w[k] |pred[k] - target[k]|. If grad_pred is non-empty it
 * receives d(loss)/d(pred[k]) = w[k] sign(pred - target) / n with sign(0) = 0.
 */
template <class T>
T weighted_l1_loss(std::span<const T> pred, std::span<const T> target,
                   std::span<const T> weights, std::span<T> grad_pred) {
    const size_t n = pred.size();
    if (target.size() != n || weights.size() != n)
        throw UsageError("weighted_l1_loss: length mismatch");
    double acc = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double d = static_cast<double>(pred[k]) - static_cast<double>(target[k]);
        acc += static_cast<double>(weights[k]) * std::abs(d);
        if (!grad_pred.empty()) {
            const double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
            grad_pred[k] = static_cast<T>(static_cast<double>(weights[k]) * s / n);
        }
    }
    return static_cast<T>(acc / n);
}

}  // namespace plclab::nn
