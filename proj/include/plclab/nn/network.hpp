#pragma once

#include <array>
#include <span>
#include <vector>

#include "plclab/mel.hpp"
#include "plclab/nn/engine.hpp"
#include "plclab/nn/types.hpp"

namespace plclab::nn {

/// Copy a ContextTensor into the flat [channel][mel][frame] layout the
/// engine consumes.
template <class T>
std::vector<T> pack_context(const ContextTensor& ctx, int in_h, int in_w) {
    std::vector<T> out;
    out.reserve(static_cast<size_t>(3) * in_h * in_w);
    for (const auto& ch : ctx.channels) {
        if (ch.n_mels != in_h || ch.n_frames != in_w)
            throw DataError("context tensor shape does not match the encoder input");
        for (double v : ch.values) out.push_back(static_cast<T>(v));
    }
    return out;
}

/**
 * Encoder + synthesizer with scratch buffers for single-sample inference.
 * Forward calls check the shape contract and reject non-finite activations.
 */
template <class T>
struct Network {
    EncoderParams<T> enc;
    SynthesizerParams<T> synth;
    EncoderBatchWork<T> enc_work;
    SynthBatchWork<T> synth_work;
    bool work_ready = false;

    void ensure_work() {
        if (!work_ready) {
            resize_encoder_work(enc, 1, enc_work);
            work_ready = true;
        }
    }

    /// ContextTensor -> latent code (length latent_dim).
    std::vector<T> encoder_forward(const ContextTensor& ctx) {
        ensure_work();
        const std::vector<T> packed = pack_context<T>(ctx, enc.in_h, enc.in_w);
        const T* ptr = packed.data();
        encoder_forward_batch(enc, &ptr, 1, enc_work);
        std::vector<T> latent(enc.latent_dim);
        Eigen::Map<VecX<T>>(latent.data(), enc.latent_dim) = enc_work.latent.col(0);
        if (!all_finite(std::span<const T>(latent)))
            throw NumericError("encoder produced non-finite activations");
        if (static_cast<int>(latent.size()) != enc.latent_dim)
            throw NumericError("encoder output dimension mismatch");
        return latent;
    }

    /// (previous packet, latent) -> next packet, each value in (-1, 1).
    std::vector<T> synthesizer_forward(std::span<const T> prev_packet,
                                       std::span<const T> latent) {
        if (static_cast<int>(prev_packet.size()) != synth.packet_dim)
            throw DataError("previous packet length does not match the synthesizer");
        if (static_cast<int>(latent.size()) != synth.latent_dim)
            throw DataError("latent length does not match the synthesizer");
        MatX<T> prev(synth.packet_dim, 1), lat(synth.latent_dim, 1);
        std::copy(prev_packet.begin(), prev_packet.end(), prev.data());
        std::copy(latent.begin(), latent.end(), lat.data());
        synthesizer_forward_batch(synth, prev, lat, 1, synth_work);
        std::vector<T> packet(synth.packet_dim);
        Eigen::Map<VecX<T>>(packet.data(), synth.packet_dim) = synth_work.out.col(0);
        if (!all_finite(std::span<const T>(packet)))
            throw NumericError("synthesizer produced non-finite activations");
        return packet;
    }

    std::vector<T> predict_packet(const ContextTensor& ctx, std::span<const T> prev_packet) {
        const auto latent = encoder_forward(ctx);
        return synthesizer_forward(prev_packet, std::span<const T>(latent));
    }
};

/// Production architecture (100x200x3 -> 512 latent -> 128-sample packets).
template <class T>
Network<T> make_default_network() {
    Network<T> n;
    n.enc = make_encoder<T>(3, 64, 512, 100, 200);
    n.synth = make_synthesizer<T>(128, 512, 1024);
    return n;
}

}  // namespace plclab::nn
