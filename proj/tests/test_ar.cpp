#include <doctest.h>

#include <cmath>
#include <vector>

#include "plclab/ar.hpp"
#include "plclab/common.hpp"
#include "plclab/rng.hpp"

using namespace plclab;

namespace {

std::vector<double> cosine_series(double omega, int n, int offset = 0) {
    std::vector<double> x(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<size_t>(i)] = std::cos(omega * (i + offset));
    return x;
}

// oracle: solve the p x p Toeplitz system R a = r by Gaussian elimination,
// independent of the Levinson recursion under test
std::vector<double> toeplitz_solve(const std::vector<double>& r, int p) {
    std::vector<std::vector<double>> m(static_cast<size_t>(p),
                                       std::vector<double>(static_cast<size_t>(p + 1)));
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) m[static_cast<size_t>(i)][static_cast<size_t>(j)] =
            r[static_cast<size_t>(std::abs(i - j))];
        m[static_cast<size_t>(i)][static_cast<size_t>(p)] = r[static_cast<size_t>(i + 1)];
    }
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int row = col + 1; row < p; ++row)
            if (std::abs(m[static_cast<size_t>(row)][static_cast<size_t>(col)]) >
                std::abs(m[static_cast<size_t>(pivot)][static_cast<size_t>(col)]))
                pivot = row;
        std::swap(m[static_cast<size_t>(col)], m[static_cast<size_t>(pivot)]);
        for (int row = 0; row < p; ++row) {
            if (row == col) continue;
            const double f = m[static_cast<size_t>(row)][static_cast<size_t>(col)] /
                             m[static_cast<size_t>(col)][static_cast<size_t>(col)];
            for (int j = col; j <= p; ++j)
                m[static_cast<size_t>(row)][static_cast<size_t>(j)] -=
                    f * m[static_cast<size_t>(col)][static_cast<size_t>(j)];
        }
    }
    std::vector<double> a(static_cast<size_t>(p));
    for (int i = 0; i < p; ++i)
        a[static_cast<size_t>(i)] =
            m[static_cast<size_t>(i)][static_cast<size_t>(p)] /
            m[static_cast<size_t>(i)][static_cast<size_t>(i)];
    return a;
}

std::vector<double> biased_autocorr(const std::vector<double>& x, int maxlag) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    std::vector<double> r(static_cast<size_t>(maxlag + 1), 0.0);
    for (int k = 0; k <= maxlag; ++k) {
        double acc = 0.0;
        for (size_t t = static_cast<size_t>(k); t < x.size(); ++t)
            acc += (x[t] - mean) * (x[t - static_cast<size_t>(k)] - mean);
        r[static_cast<size_t>(k)] = acc / static_cast<double>(x.size());
    }
    return r;
}

}  // namespace

TEST_CASE("fit_ols recovers the exact sinusoid recurrence") {
    // cos(w n) satisfies x[n] = 2cos(w) x[n-1] - x[n-2] exactly
    const auto h = cosine_series(0.1, 1024);
    const ArCoefficients c = fit_ols(h, 2);
    CHECK(std::abs(c.coeffs[0] - 2.0 * std::cos(0.1)) < 1e-6);
    CHECK(std::abs(c.coeffs[1] + 1.0) < 1e-6);
    CHECK(std::abs(c.intercept) < 1e-6);
}

TEST_CASE("fit_ols on all-zero history returns the minimum-norm zero solution") {
    std::vector<double> zeros(256, 0.0);
    const ArCoefficients c = fit_ols(zeros, 4);
    for (double a : c.coeffs) CHECK(a == 0.0);
    CHECK(c.intercept == 0.0);
}

TEST_CASE("constant history forecasts its own value at any horizon") {
    std::vector<double> h(64, 0.5);
    const ArCoefficients c = fit_ols(h, 1);
    const ForecastResult f = forecast(c, h, 128);
    for (double v : f.samples) CHECK(v == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("fit_ols rejects bad inputs") {
    std::vector<double> tiny(4, 1.0);
    CHECK_THROWS_AS(fit_ols(tiny, 2), DataError);
    std::vector<double> bad(64, 0.0);
    bad[10] = std::nan("");
    CHECK_THROWS_AS(fit_ols(bad, 2), NumericError);
    CHECK_THROWS_AS(fit_ols(bad, 0), UsageError);
}

TEST_CASE("OLS residual is a local minimum in every coefficient") {
    Rng rng(9);
    std::vector<double> h(512);
    double s = 0.0;
    for (auto& v : h) {
        s = 0.7 * s + 0.1 * rng.normal();
        v = s;
    }
    const int p = 3;
    const ArCoefficients c = fit_ols(h, p);
    auto rss = [&](const std::vector<double>& coeffs, double intercept) {
        double acc = 0.0;
        for (size_t n = p; n < h.size(); ++n) {
            double pred = intercept;
            for (int k = 1; k <= p; ++k) pred += coeffs[static_cast<size_t>(k - 1)] * h[n - static_cast<size_t>(k)];
            acc += (h[n] - pred) * (h[n] - pred);
        }
        return acc;
    };
    const double base = rss(c.coeffs, c.intercept);
    for (int k = 0; k < p; ++k) {
        for (double d : {-1e-3, 1e-3}) {
            auto perturbed = c.coeffs;
            perturbed[static_cast<size_t>(k)] += d;
            CHECK(rss(perturbed, c.intercept) >= base);
        }
    }
    CHECK(rss(c.coeffs, c.intercept + 1e-3) >= base);
    CHECK(rss(c.coeffs, c.intercept - 1e-3) >= base);
}

TEST_CASE("fit_ols recovers a known stable AR process from its noiseless recursion") {
    const std::vector<double> truth = {0.6, -0.25, 0.1};
    std::vector<double> x = {0.3, -0.2, 0.5};
    for (int n = 3; n < 64; ++n) {  // history >= 8p
        double v = 0.0;
        for (size_t k = 0; k < truth.size(); ++k) v += truth[k] * x[x.size() - 1 - k];
        x.push_back(v);
    }
    const ArCoefficients c = fit_ols(x, 3);
    for (size_t k = 0; k < truth.size(); ++k) CHECK(std::abs(c.coeffs[k] - truth[k]) < 1e-6);
}

TEST_CASE("fit_yule_walker agrees with a direct Toeplitz solve on white noise") {
    Rng rng(17);
    std::vector<double> x(4096);
    for (auto& v : x) v = rng.normal();
    const int p = 4;
    const ArCoefficients c = fit_yule_walker(x, p);
    const auto r = biased_autocorr(x, p);
    const auto oracle = toeplitz_solve(r, p);
    for (int k = 0; k < p; ++k) {
        CHECK(std::abs(c.coeffs[static_cast<size_t>(k)] - oracle[static_cast<size_t>(k)]) < 1e-9);
        CHECK(std::abs(c.coeffs[static_cast<size_t>(k)]) < 0.2);  // white noise: no structure
    }
}

TEST_CASE("fit_yule_walker forecasts a sinusoid accurately") {
    const auto h = cosine_series(0.1, 2048);
    const ArCoefficients c = fit_yule_walker(h, 2);
    const ForecastResult f = forecast(c, h, 128);
    double mae = 0.0;
    for (int i = 0; i < 128; ++i)
        mae += std::abs(f.samples[static_cast<size_t>(i)] - std::cos(0.1 * (2048 + i)));
    CHECK(mae / 128.0 < 1e-3);
}

TEST_CASE("fit_yule_walker handles zero-energy history") {
    std::vector<double> zeros(128, 0.0);
    const ArCoefficients c = fit_yule_walker(zeros, 4);
    for (double a : c.coeffs) CHECK(a == 0.0);
    const ForecastResult f = forecast(c, zeros, 128);
    for (double v : f.samples) CHECK(v == 0.0);
}

TEST_CASE("forecast continues the exact sinusoid recurrence") {
    ArCoefficients c;
    c.order = 2;
    c.method = ArMethod::kOls;
    c.intercept = 0.0;
    c.coeffs = {2.0 * std::cos(0.1), -1.0};
    const auto h = cosine_series(0.1, 256);
    const ForecastResult f = forecast(c, h, 128);
    CHECK_FALSE(f.clamped);
    for (int i = 0; i < 128; ++i)
        CHECK(std::abs(f.samples[static_cast<size_t>(i)] - std::cos(0.1 * (256 + i))) < 1e-5);
}

TEST_CASE("trivial forecasts: zero model and unit-root repeat") {
    ArCoefficients zero;
    zero.order = 1;
    zero.coeffs = {0.0};
    std::vector<double> h = {0.4, 0.2};
    const ForecastResult fz = forecast(zero, h, 128);
    for (double v : fz.samples) CHECK(v == 0.0);

    ArCoefficients walk;
    walk.order = 1;
    walk.coeffs = {1.0};
    std::vector<double> h2 = {0.1, 0.3};
    const ForecastResult fw = forecast(walk, h2, 128);
    for (double v : fw.samples) CHECK(v == 0.3);
}

TEST_CASE("forecast clamps divergent rollouts and flags it") {
    ArCoefficients hot;
    hot.order = 1;
    hot.coeffs = {1.5};
    std::vector<double> h = {1.0};
    const ForecastResult f = forecast(hot, h, 64);
    CHECK(f.clamped);
    for (double v : f.samples) CHECK(std::abs(v) <= 4.0);
}

TEST_CASE("forecast depends only on the last p samples") {
    const auto h = cosine_series(0.3, 500);
    const ArCoefficients c = fit_ols(h, 8);
    const ForecastResult full = forecast(c, h, 16);
    const std::vector<double> tail(h.end() - 8, h.end());
    const ForecastResult short_hist = forecast(c, tail, 16);
    CHECK(full.samples == short_hist.samples);  // bitwise
}

TEST_CASE("Yule-Walker rollout stays bounded on real fits") {
    Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(2048);
        double s = 0.0;
        for (auto& v : x) {
            s = 0.95 * s + 0.05 * rng.normal();
            v = std::clamp(s, -1.0, 1.0);
        }
        const double hist_peak = *std::max_element(x.begin(), x.end(),
                                                   [](double a, double b) {
                                                       return std::abs(a) < std::abs(b);
                                                   });
        const ArCoefficients c = fit_yule_walker(x, 16);
        const ForecastResult f = forecast(c, x, 512);
        CHECK_FALSE(f.clamped);
        for (double v : f.samples) CHECK(std::abs(v) <= std::max(1.0, std::abs(hist_peak)) * 4.0);
    }
}
