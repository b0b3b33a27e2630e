#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "plclab/common.hpp"
#include "plclab/rng.hpp"

namespace plclab::nn {

template <class T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Flat row-major array with an explicit shape.
template <class T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    static Tensor zeros(std::vector<int> shape) {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        return Tensor{std::move(shape), std::vector<T>(n, T(0))};
    }
    size_t size() const { return data.size(); }
    bool shape_consistent() const {
        size_t n = 1;
        for (int d : shape) n *= static_cast<size_t>(d);
        return n == data.size();
    }
};

/**
 * 3x3 same-padding convolution. Weights are stored as out_ch x (9 * in_ch);
 * column block k = 3*(dy+1) + (dx+1) holds the out_ch x in_ch matrix for the
 * spatial tap (dy, dx), dy/dx in {-1, 0, 1}.
 */
template <class T>
struct Conv3x3 {
    int in_ch = 0;
    int out_ch = 0;
    MatX<T> w;
    VecX<T> b;
};

/// Dense layer y = w x + b with w of shape out x in.
template <class T>
struct Linear {
    MatX<T> w;
    VecX<T> b;
};

/**
 * Context encoder: three 3x3/64-channel conv+ReLU stages with max pooling
 * (1x2 after the first, 2x2 after the other two) followed by one linear
 * layer down to the latent dimension. With the production input of
 * 3 x 100 x 200 the flatten is 64 * 25 * 25 = 40000 and the latent is 512.
 */
template <class T>
struct EncoderParams {
    int in_ch = 3;
    int conv_ch = 64;
    int latent_dim = 512;
    int in_h = 100;  // mel bins
    int in_w = 200;  // time frames
    Conv3x3<T> conv1, conv2, conv3;
    Linear<T> out;

    int out_h() const { return in_h / 4; }
    int out_w() const { return in_w / 8; }
    int flatten_dim() const { return conv_ch * out_h() * out_w(); }
};

/**
 * Packet synthesizer: [previous packet ; latent] -> 3 ReLU layers of
 * hidden_dim -> linear to packet_dim with tanh squashing into (-1, 1).
 */
template <class T>
struct SynthesizerParams {
    int packet_dim = 128;
    int latent_dim = 512;
    int hidden_dim = 1024;
    Linear<T> fc1, fc2, fc3, out;

    int in_dim() const { return packet_dim + latent_dim; }
};

namespace detail {

template <class T>
void fill_uniform(T* data, size_t n, double limit, Rng& rng) {
    for (size_t i = 0; i < n; ++i)
        data[i] = static_cast<T>(rng.uniform(-limit, limit));
}

}  // namespace detail

/// He-uniform fill (hidden layers followed by ReLU): limit sqrt(6 / fan_in).
template <class T>
void init_he_uniform(MatX<T>& w, int fan_in, Rng& rng) {
    detail::fill_uniform(w.data(), static_cast<size_t>(w.size()), std::sqrt(6.0 / fan_in), rng);
}

/// Xavier-uniform fill (tanh output layer): limit sqrt(6 / (fan_in + fan_out)).
template <class T>
void init_xavier_uniform(MatX<T>& w, int fan_in, int fan_out, Rng& rng) {
    detail::fill_uniform(w.data(), static_cast<size_t>(w.size()),
                         std::sqrt(6.0 / (fan_in + fan_out)), rng);
}

template <class T>
EncoderParams<T> make_encoder(int in_ch, int conv_ch, int latent_dim, int in_h, int in_w) {
    if (in_h % 4 != 0 || in_w % 8 != 0)
        throw UsageError("encoder input dims must divide by the pooling plan (h%4, w%8)");
    EncoderParams<T> p;
    p.in_ch = in_ch;
    p.conv_ch = conv_ch;
    p.latent_dim = latent_dim;
    p.in_h = in_h;
    p.in_w = in_w;
    auto conv = [conv_ch](int ic) {
        Conv3x3<T> c;
        c.in_ch = ic;
        c.out_ch = conv_ch;
        c.w = MatX<T>::Zero(conv_ch, 9 * ic);
        c.b = VecX<T>::Zero(conv_ch);
        return c;
    };
    p.conv1 = conv(in_ch);
    p.conv2 = conv(conv_ch);
    p.conv3 = conv(conv_ch);
    p.out.w = MatX<T>::Zero(latent_dim, p.flatten_dim());
    p.out.b = VecX<T>::Zero(latent_dim);
    return p;
}

template <class T>
SynthesizerParams<T> make_synthesizer(int packet_dim, int latent_dim, int hidden_dim) {
    SynthesizerParams<T> p;
    p.packet_dim = packet_dim;
    p.latent_dim = latent_dim;
    p.hidden_dim = hidden_dim;
    p.fc1.w = MatX<T>::Zero(hidden_dim, p.in_dim());
    p.fc1.b = VecX<T>::Zero(hidden_dim);
    p.fc2.w = MatX<T>::Zero(hidden_dim, hidden_dim);
    p.fc2.b = VecX<T>::Zero(hidden_dim);
    p.fc3.w = MatX<T>::Zero(hidden_dim, hidden_dim);
    p.fc3.b = VecX<T>::Zero(hidden_dim);
    p.out.w = MatX<T>::Zero(packet_dim, hidden_dim);
    p.out.b = VecX<T>::Zero(packet_dim);
    return p;
}

/// Seeded initialization. Draw order is fixed (conv1..conv3, encoder linear,
/// fc1..fc3, output) so a seed fully determines the starting weights.
template <class T>
void init_params(EncoderParams<T>& enc, SynthesizerParams<T>& synth, Rng& rng) {
    init_he_uniform(enc.conv1.w, enc.conv1.in_ch * 9, rng);
    init_he_uniform(enc.conv2.w, enc.conv2.in_ch * 9, rng);
    init_he_uniform(enc.conv3.w, enc.conv3.in_ch * 9, rng);
    init_he_uniform(enc.out.w, enc.flatten_dim(), rng);
    init_he_uniform(synth.fc1.w, synth.in_dim(), rng);
    init_he_uniform(synth.fc2.w, synth.hidden_dim, rng);
    init_he_uniform(synth.fc3.w, synth.hidden_dim, rng);
    init_xavier_uniform(synth.out.w, synth.hidden_dim, synth.packet_dim, rng);
    // biases stay zero
}

/// Named view of one parameter array. Registry order is the canonical field
/// order for the optimizer and for weight-file payloads.
template <class T>
struct ParamView {
    std::string name;
    T* data;
    size_t size;
};

template <class T>
std::vector<ParamView<T>> param_views(EncoderParams<T>& enc, SynthesizerParams<T>& synth) {
    std::vector<ParamView<T>> v;
    auto add = [&v](const std::string& name, auto& m) {
        v.push_back({name, m.data(), static_cast<size_t>(m.size())});
    };
    add("enc.conv1.w", enc.conv1.w);
    add("enc.conv1.b", enc.conv1.b);
    add("enc.conv2.w", enc.conv2.w);
    add("enc.conv2.b", enc.conv2.b);
    add("enc.conv3.w", enc.conv3.w);
    add("enc.conv3.b", enc.conv3.b);
    add("enc.out.w", enc.out.w);
    add("enc.out.b", enc.out.b);
    add("synth.fc1.w", synth.fc1.w);
    add("synth.fc1.b", synth.fc1.b);
    add("synth.fc2.w", synth.fc2.w);
    add("synth.fc2.b", synth.fc2.b);
    add("synth.fc3.w", synth.fc3.w);
    add("synth.fc3.b", synth.fc3.b);
    add("synth.out.w", synth.out.w);
    add("synth.out.b", synth.out.b);
    return v;
}

template <class T>
size_t total_param_count(const EncoderParams<T>& enc, const SynthesizerParams<T>& synth) {
    auto& e = const_cast<EncoderParams<T>&>(enc);
    auto& s = const_cast<SynthesizerParams<T>&>(synth);
    size_t n = 0;
    for (auto& pv : param_views(e, s)) n += pv.size;
    return n;
}

template <class T>
bool all_finite(std::span<const T> x) {
    for (const T& v : x)
        if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
}

}  // namespace plclab::nn
