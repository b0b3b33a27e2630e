#include "plclab/ar.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "plclab/common.hpp"

namespace plclab {

namespace {

constexpr double kReflectionClamp = 0.9999;

void check_history(std::span<const double> history, int order) {
    if (order < 1) throw UsageError("AR order must be >= 1");
    if (static_cast<int64_t>(history.size()) < 2 * static_cast<int64_t>(order) + 1)
        throw DataError("history too short for AR fit (need >= 2p + 1 samples)");
    for (double v : history)
        if (!std::isfinite(v)) throw NumericError("non-finite sample in AR history");
}

}  // namespace

std::string to_string(ArMethod m) { return m == ArMethod::kOls ? "ols" : "yule-walker"; }

ArMethod ar_method_from_string(const std::string& s) {
    if (s == "ols") return ArMethod::kOls;
    if (s == "yule-walker" || s == "yw") return ArMethod::kYuleWalker;
    throw UsageError("unknown AR method: " + s);
}

ArCoefficients fit_ols(std::span<const double> history, int order) {
    check_history(history, order);
    const int64_t n = static_cast<int64_t>(history.size());
    const int64_t rows = n - order;
    Eigen::MatrixXd x(rows, order + 1);
    Eigen::VectorXd y(rows);
    for (int64_t r = 0; r < rows; ++r) {
        const int64_t t = r + order;
        x(r, 0) = 1.0;
        for (int k = 1; k <= order; ++k) x(r, k) = history[static_cast<size_t>(t - k)];
        y(r) = history[static_cast<size_t>(t)];
    }
    // complete orthogonal decomposition: least-squares solution, minimum-norm
    // when the design is rank deficient
    Eigen::VectorXd beta = x.completeOrthogonalDecomposition().solve(y);

    ArCoefficients out;
    out.order = order;
    out.method = ArMethod::kOls;
    out.intercept = beta(0);
    out.coeffs.assign(beta.data() + 1, beta.data() + 1 + order);
    return out;
}

ArCoefficients fit_yule_walker(std::span<const double> history, int order) {
    check_history(history, order);
    const int64_t n = static_cast<int64_t>(history.size());
    double mean = 0.0;
    for (double v : history) mean += v;
    mean /= static_cast<double>(n);

    // biased autocorrelation of the mean-removed signal
    std::vector<double> r(static_cast<size_t>(order) + 1, 0.0);
    std::vector<double> centered(history.size());
    for (size_t i = 0; i < history.size(); ++i) centered[i] = history[i] - mean;
    for (int k = 0; k <= order; ++k) {
        double acc = 0.0;
        for (int64_t t = k; t < n; ++t) acc += centered[static_cast<size_t>(t)] * centered[static_cast<size_t>(t - k)];
        r[static_cast<size_t>(k)] = acc / static_cast<double>(n);
    }

    ArCoefficients out;
    out.order = order;
    out.method = ArMethod::kYuleWalker;
    out.intercept = mean;
    out.coeffs.assign(static_cast<size_t>(order), 0.0);
    if (r[0] <= 0.0) return out;  // zero-energy history

    // Levinson-Durbin with reflection clamping for guaranteed stability
    std::vector<double> a(static_cast<size_t>(order) + 1, 0.0);
    std::vector<double> prev(a);
    double err = r[0];
    for (int m = 1; m <= order; ++m) {
        double acc = r[static_cast<size_t>(m)];
        for (int i = 1; i < m; ++i) acc -= a[static_cast<size_t>(i)] * r[static_cast<size_t>(m - i)];
        double k = err > 0.0 ? acc / err : 0.0;
        k = std::clamp(k, -kReflectionClamp, kReflectionClamp);
        prev = a;
        a[static_cast<size_t>(m)] = k;
        for (int i = 1; i < m; ++i)
            a[static_cast<size_t>(i)] = prev[static_cast<size_t>(i)] - k * prev[static_cast<size_t>(m - i)];
        err *= (1.0 - k * k);
    }
    for (int i = 1; i <= order; ++i) out.coeffs[static_cast<size_t>(i - 1)] = a[static_cast<size_t>(i)];
    return out;
}

ForecastResult forecast(const ArCoefficients& model, std::span<const double> history,
                        int horizon) {
    const int p = model.order;
    if (static_cast<int>(history.size()) < p)
        throw DataError("forecast: history shorter than the model order");
    const bool yw = model.method == ArMethod::kYuleWalker;
    const double mean = yw ? model.intercept : 0.0;

    // rolling window of the last p values (raw amplitudes)
    std::vector<double> window(history.end() - p, history.end());
    ForecastResult out;
    out.samples.resize(static_cast<size_t>(horizon));
    for (int i = 0; i < horizon; ++i) {
        double acc = yw ? mean : model.intercept;
        for (int k = 1; k <= p; ++k) {
            const double past = window[static_cast<size_t>(p - k)];
            acc += model.coeffs[static_cast<size_t>(k - 1)] * (yw ? past - mean : past);
        }
        if (acc > 4.0) {
            acc = 4.0;
            out.clamped = true;
        } else if (acc < -4.0) {
            acc = -4.0;
            out.clamped = true;
        }
        out.samples[static_cast<size_t>(i)] = acc;
        window.erase(window.begin());
        window.push_back(acc);
    }
    return out;
}

}  // namespace plclab
