#include "plclab/loss_pattern.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "plclab/common.hpp"
#include "plclab/rng.hpp"

namespace plclab {

LossPattern generate_loss_pattern(int64_t n_packets, double rate, uint64_t seed) {
    if (n_packets < 10) throw DataError("need at least 10 packets to simulate losses");
    if (rate <= 0.0 || rate > 0.2)
        throw DataError("loss rate must be in (0, 0.2] to keep losses isolated");
    const int64_t count = std::llround(static_cast<double>(n_packets) * rate);

    Rng rng(seed);
    std::set<int64_t> lost;
    int64_t attempts = 0;
    const int64_t max_attempts = 1000 * std::max<int64_t>(count, 1) + 1000;
    while (static_cast<int64_t>(lost.size()) < count) {
        if (++attempts > max_attempts)
            throw DataError("could not satisfy the isolated-loss constraint at this rate");
        const int64_t i = rng.uniform_int(n_packets);
        if (lost.count(i) || lost.count(i - 1) || lost.count(i + 1)) continue;
        lost.insert(i);
    }

    LossPattern out;
    out.lost.assign(lost.begin(), lost.end());
    out.seed = seed;
    out.rate = rate;
    return out;
}

void save_loss_trace(const LossPattern& pattern, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw DataError("cannot write loss trace: " + path.string());
    f << "packet_index\n";
    for (int64_t i : pattern.lost) f << i << "\n";
    if (!f) throw DataError("short write: " + path.string());
}

LossPattern load_loss_trace(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read loss trace: " + path.string());
    std::string line;
    if (!std::getline(f, line) || line != "packet_index")
        throw DataError("loss trace must start with a packet_index header: " + path.string());
    LossPattern out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        try {
            out.lost.push_back(std::stoll(line));
        } catch (const std::exception&) {
            throw DataError("bad row in loss trace: " + line);
        }
    }
    std::sort(out.lost.begin(), out.lost.end());
    for (size_t i = 1; i < out.lost.size(); ++i) {
        if (out.lost[i] == out.lost[i - 1]) throw DataError("duplicate packet index in loss trace");
        if (out.lost[i] == out.lost[i - 1] + 1)
            throw DataError("adjacent losses in trace violate the isolated-loss model");
    }
    return out;
}

}  // namespace plclab
