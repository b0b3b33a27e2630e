#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace plclab {

/// Seeded set of dropped packet indices over a simulated stream. Losses are
/// isolated: no two lost indices are ever adjacent.
struct LossPattern {
    int packet_size = 128;
    std::vector<int64_t> lost;  // sorted, strictly increasing, non-adjacent
    uint64_t seed = 0;
    double rate = 0.0;
};

/**
 * Draw round(n_packets * rate) distinct packet indices uniformly at random,
 * rejecting any draw adjacent to an already-lost packet. Deterministic given
 * the seed. Requires rate in (0, 0.2] and n_packets >= 10.
 */
LossPattern generate_loss_pattern(int64_t n_packets, double rate, uint64_t seed);

/// CSV with a `packet_index` header, one row per lost packet.
void save_loss_trace(const LossPattern& pattern, const std::filesystem::path& path);
LossPattern load_loss_trace(const std::filesystem::path& path);

}  // namespace plclab
