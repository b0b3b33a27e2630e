#include "plclab/corpus_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "plclab/common.hpp"
#include "plclab/rng.hpp"
#include "plclab/wav_io.hpp"

namespace plclab {

namespace {

constexpr int kRate = 16000;
constexpr double kMinF0 = 65.0, kMaxF0 = 660.0;
constexpr double kNoiseFloor = 0.0018;  // about -55 dB, gated by the envelope

struct Note {
    double f0;
    int n_harmonics;
    std::vector<double> amps;    // per harmonic, sums to 1
    std::vector<double> phases;  // per harmonic offset
    double level;
    double vib_rate, vib_depth, vib_onset;
    double attack, release;
    double trem_rate, trem_phase;
};

Note draw_note(Rng& rng, double& log_f0) {
    Note n;
    log_f0 += rng.uniform(-0.35, 0.35);
    log_f0 = std::clamp(log_f0, std::log(kMinF0), std::log(kMaxF0));
    n.f0 = std::exp(log_f0);
    n.n_harmonics = 6 + static_cast<int>(rng.uniform_int(5));  // 6..10
    // keep partials under the anti-alias band
    while (n.n_harmonics * n.f0 > 7500.0 && n.n_harmonics > 1) --n.n_harmonics;
    const double alpha = rng.uniform(0.8, 1.8);
    double sum = 0.0;
    for (int k = 1; k <= n.n_harmonics; ++k) {
        const double a = std::pow(k, -alpha) * rng.uniform(0.75, 1.25);
        n.amps.push_back(a);
        n.phases.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
        sum += a;
    }
    for (double& a : n.amps) a /= sum;
    n.level = rng.uniform(0.3, 0.9);
    n.vib_rate = rng.uniform(4.5, 6.5);
    n.vib_depth = rng.uniform(0.001, 0.004);
    n.vib_onset = rng.uniform(0.1, 0.4);
    n.attack = rng.uniform(0.02, 0.06);
    n.release = rng.uniform(0.05, 0.12);
    n.trem_rate = rng.uniform(0.3, 1.2);
    n.trem_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return n;
}

}  // namespace

AudioBuffer generate_track(double seconds, uint64_t seed) {
    if (seconds <= 0.0) throw UsageError("track length must be positive");
    Rng rng = Rng::fork(seed, 0xC0DA);
    const int64_t total = static_cast<int64_t>(std::llround(seconds * kRate));
    AudioBuffer out;
    out.sample_rate = kRate;
    out.samples.assign(static_cast<size_t>(total), 0.0);

    double log_f0 = rng.uniform(std::log(110.0), std::log(440.0));
    int64_t t = 0;
    int notes_until_rest = 6 + static_cast<int>(rng.uniform_int(10));
    while (t < total) {
        if (notes_until_rest <= 0) {
            // true digital silence between phrases
            t += static_cast<int64_t>(rng.uniform(0.2, 0.5) * kRate);
            notes_until_rest = 6 + static_cast<int>(rng.uniform_int(10));
            continue;
        }
        --notes_until_rest;
        const Note note = draw_note(rng, log_f0);
        const int64_t dur =
            std::min<int64_t>(static_cast<int64_t>(rng.uniform(0.6, 2.5) * kRate), total - t);
        const double dur_s = static_cast<double>(dur) / kRate;
        double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        for (int64_t i = 0; i < dur; ++i) {
            const double tau = static_cast<double>(i) / kRate;
            double vib = 0.0;
            if (tau > note.vib_onset)
                vib = note.vib_depth *
                      std::sin(2.0 * std::numbers::pi * note.vib_rate * (tau - note.vib_onset));
            const double f_inst = note.f0 * (1.0 + vib);
            phase += 2.0 * std::numbers::pi * f_inst / kRate;
            double s = 0.0;
            for (int k = 0; k < note.n_harmonics; ++k)
                s += note.amps[static_cast<size_t>(k)] *
                     std::sin((k + 1) * phase + note.phases[static_cast<size_t>(k)]);

            double env = 1.0;
            if (tau < note.attack) env = 0.5 - 0.5 * std::cos(std::numbers::pi * tau / note.attack);
            const double until_end = dur_s - tau;
            if (until_end < note.release)
                env *= 0.5 - 0.5 * std::cos(std::numbers::pi * until_end / note.release);
            env *= 1.0 + 0.08 * std::sin(2.0 * std::numbers::pi * note.trem_rate * tau +
                                         note.trem_phase);

            const double noise = kNoiseFloor * rng.normal();
            out.samples[static_cast<size_t>(t + i)] = note.level * env * (s + noise);
        }
        t += dur;
    }

    // fixed headroom so PCM16 never clips
    const double peak = peak_amplitude(out.samples);
    if (peak > 0.0)
        for (double& s : out.samples) s = s * (0.9 / peak);
    return out;
}

std::vector<std::filesystem::path> generate_corpus(const std::filesystem::path& out_dir,
                                                   double minutes, uint64_t seed,
                                                   double track_minutes) {
    if (minutes < 1.0) throw UsageError("corpus length must be at least one minute");
    if (track_minutes <= 0.0) throw UsageError("track length must be positive");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("cannot create corpus directory: " + out_dir.string());

    std::vector<std::filesystem::path> paths;
    double remaining = minutes;
    int index = 0;
    while (remaining > 1e-9) {
        const double len = std::min(track_minutes, remaining);
        char name[32];
        std::snprintf(name, sizeof(name), "track_%03d.wav", index);
        const auto path = out_dir / name;
        const AudioBuffer track = generate_track(len * 60.0, seed + static_cast<uint64_t>(index));
        save_wav(track, path);
        paths.push_back(path);
        remaining -= len;
        ++index;
    }
    return paths;
}

}  // namespace plclab
