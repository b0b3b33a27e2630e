#pragma once

#include <span>
#include <string>
#include <vector>

namespace plclab {

enum class ArMethod { kOls, kYuleWalker };

std::string to_string(ArMethod m);
ArMethod ar_method_from_string(const std::string& s);

/**
 * Order-p linear predictor: x^[n] = intercept-term + sum_k coeffs[k-1] * x[n-k].
 *
 * For kOls the intercept is the fitted regression constant. For kYuleWalker
 * the intercept stores the history mean and prediction runs on mean-removed
 * values: x^[n] = mean + sum_k a_k (x[n-k] - mean).
 */
struct ArCoefficients {
    int order = 0;
    std::vector<double> coeffs;
    double intercept = 0.0;
    ArMethod method = ArMethod::kOls;
};

/**
 * Conditional least-squares fit with intercept: minimizes
 * sum_{n=p}^{N-1} (x[n] - c - sum_k a_k x[n-k])^2. Rank-deficient systems
 * get the minimum-norm solution. Requires N >= 2p + 1 and finite samples.
 */
ArCoefficients fit_ols(std::span<const double> history, int order);

/**
 * Yule-Walker fit via Levinson-Durbin on biased autocorrelation estimates of
 * the mean-removed history. Reflection coefficients are clamped to magnitude
 * 0.9999 so the synthesis filter stays stable; zero-energy history yields
 * zero coefficients.
 */
ArCoefficients fit_yule_walker(std::span<const double> history, int order);

struct ForecastResult {
    std::vector<double> samples;
    bool clamped = false;  // any sample hit the +-4 divergence clamp
};

/**
 * Recursive rollout: each forecast sample is appended to the working history
 * and used by subsequent predictions. Output values are clamped to [-4, 4]
 * and the clamp is flagged. Requires history length >= order.
 */
ForecastResult forecast(const ArCoefficients& model, std::span<const double> history,
                        int horizon);

}  // namespace plclab
