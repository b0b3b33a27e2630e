#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "plclab/common.hpp"
#include "plclab/nn/types.hpp"

namespace plclab::nn {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

template <class T>
struct AdamState {
    std::vector<std::vector<T>> m, v;  // parallel to the parameter registry
    int64_t t = 0;

    static AdamState make(const std::vector<ParamView<T>>& params) {
        AdamState s;
        for (const auto& p : params) {
            s.m.emplace_back(p.size, T(0));
            s.v.emplace_back(p.size, T(0));
        }
        return s;
    }
};

/**
 * One Adam update with bias correction. The step is transactional: all
 * gradients are checked for finiteness first and a NumericError leaves
 * parameters and state untouched.
 */
template <class T>
void adam_step(const std::vector<ParamView<T>>& params, const std::vector<ParamView<T>>& grads,
               AdamState<T>& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size())
        throw UsageError("adam_step: mismatched parameter/gradient/state registries");
    for (size_t i = 0; i < grads.size(); ++i)
        if (!all_finite(std::span<const T>(grads[i].data, grads[i].size)))
            throw NumericError("adam_step: non-finite gradient in " + grads[i].name);

    state.t += 1;
    // scale factors folded so the inner loop stays in T precision
    const T b1 = static_cast<T>(kAdamBeta1), b2 = static_cast<T>(kAdamBeta2);
    const T ob1 = static_cast<T>(1.0 - kAdamBeta1), ob2 = static_cast<T>(1.0 - kAdamBeta2);
    const T inv_c1 =
        static_cast<T>(1.0 / (1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t))));
    const T inv_c2 =
        static_cast<T>(1.0 / (1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t))));
    const T eps = static_cast<T>(kAdamEps);
    const T step = static_cast<T>(lr);
    for (size_t i = 0; i < params.size(); ++i) {
        T* p = params[i].data;
        const T* g = grads[i].data;
        T* m = state.m[i].data();
        T* v = state.v[i].data();
        const int64_t n = static_cast<int64_t>(params[i].size);
#pragma omp parallel for schedule(static)
        for (int64_t j = 0; j < n; ++j) {
            const T gj = g[j];
            const T mj = b1 * m[j] + ob1 * gj;
            const T vj = b2 * v[j] + ob2 * gj * gj;
            m[j] = mj;
            v[j] = vj;
            p[j] -= step * (mj * inv_c1) / (std::sqrt(vj * inv_c2) + eps);
        }
    }
}

}  // namespace plclab::nn
