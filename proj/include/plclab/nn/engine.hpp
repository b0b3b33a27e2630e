#pragma once

#include <omp.h>

#include <vector>

#include "plclab/nn/types.hpp"

// Batched forward/backward for the encoder + synthesizer pair.
//
// Activation planes are stored channels-by-pixel (channel index contiguous
// per pixel, Eigen column = pixel) with a one-pixel zero guard ring around
// each plane, so a same-padding 3x3 convolution becomes nine GEMMs on
// shifted contiguous column ranges. The first convolution instead consumes an
// explicit patch matrix, which suits its 3 input channels better.
//
// Determinism: per-sample work is independent and all cross-sample
// reductions run serially in sample order; parallel GEMMs are split into
// fixed-size row blocks. Results are identical for any thread count.
//
// Gradient contract: every *_backward_batch call overwrites the gradients it
// is responsible for (no accumulation across calls).

namespace plclab::nn {

inline int padded_count(int h, int w) { return (h + 2) * (w + 2); }
inline int interior_col(int y, int x, int w) { return (y + 1) * (w + 2) + (x + 1); }

template <class T>
void zero_guard_ring(MatX<T>& m, int h, int w) {
    const int pw = w + 2;
    m.middleCols(0, pw).setZero();
    m.middleCols((h + 1) * pw, pw).setZero();
    for (int y = 1; y <= h; ++y) {
        m.col(y * pw).setZero();
        m.col(y * pw + pw - 1).setZero();
    }
}

/// C = A * B computed in fixed row blocks under OpenMP. The block split is
/// independent of the thread count, so results are bit-stable.
template <class C, class A, class B>
void gemm_rowblocks(C&& c, const A& a, const B& b, int block = 64) {
    const int rows = static_cast<int>(a.rows());
    const int nblocks = (rows + block - 1) / block;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nblocks; ++i) {
        const int r0 = i * block;
        const int n = std::min(block, rows - r0);
        c.middleRows(r0, n).noalias() = a.middleRows(r0, n) * b;
    }
}

/// Per-sample cached activations of the encoder stack.
template <class T>
struct EncoderActs {
    MatX<T> x_planes;  // padded_count(h0,w0) x in_ch, one contiguous plane per channel
    MatX<T> patches1;  // padded_count(h0,w0) x (9*in_ch), conv1 patch matrix
    MatX<T> r1;        // conv_ch x P0, post-ReLU, guards zero
    MatX<T> q1;        // conv_ch x P1, post-pool
    Eigen::MatrixXi i1;
    MatX<T> r2;
    MatX<T> q2;
    Eigen::MatrixXi i2;
    MatX<T> r3;
    MatX<T> q3;
    Eigen::MatrixXi i3;
};

/// Per-thread backward scratch planes.
template <class T>
struct EncoderScratch {
    MatX<T> gq3, gz3, gq2, gz2, gq1, gz1;
};

/// Per-sample partial parameter gradients for the conv stack.
template <class T>
struct ConvGrads {
    MatX<T> w1, w2, w3;
    VecX<T> b1, b2, b3;
};

template <class T>
struct EncoderBatchWork {
    int max_batch = 0;
    std::vector<EncoderActs<T>> acts;
    std::vector<ConvGrads<T>> partial;
    std::vector<EncoderScratch<T>> scratch;  // one per OpenMP thread
    MatX<T> flat;       // flatten_dim x B
    MatX<T> latent;     // latent_dim x B
    MatX<T> grad_flat;  // flatten_dim x B
};

template <class T>
struct SynthBatchWork {
    MatX<T> in;  // (packet+latent) x B
    MatX<T> h1, h2, h3;
    MatX<T> out;  // packet x B, post-tanh
    MatX<T> gz;   // scratch
};

namespace detail {

// y = conv3x3(x) + bias on (ch x padded) planes with guard rings. The center
// tap covers the full column range and is assigned first, so no pre-zeroing
// is needed. Afterwards y's guard ring is zeroed.
template <class T>
void conv_shift_forward(const Conv3x3<T>& c, const MatX<T>& x, MatX<T>& y, int h, int w) {
    const int pw = w + 2;
    const int total = padded_count(h, w);
    y.noalias() = c.w.middleCols(4 * c.in_ch, c.in_ch) * x;  // center tap (0,0)
    for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        const int dy = k / 3 - 1, dx = k % 3 - 1;
        const int delta = dy * pw + dx;
        const int lo = std::max(0, -delta);
        const int hi = std::min(total, total - delta);
        const int n = hi - lo;
        y.middleCols(lo, n).noalias() +=
            c.w.middleCols(k * c.in_ch, c.in_ch) * x.middleCols(lo + delta, n);
    }
    y.colwise() += c.b;
    zero_guard_ring(y, h, w);
}

// gx = W^T * gy over the same shifted ranges. gy's guard ring must be zero.
template <class T>
void conv_shift_backward_input(const Conv3x3<T>& c, const MatX<T>& gy, MatX<T>& gx, int h,
                               int w) {
    const int pw = w + 2;
    const int total = padded_count(h, w);
    gx.noalias() = c.w.middleCols(4 * c.in_ch, c.in_ch).transpose() * gy;
    for (int k = 0; k < 9; ++k) {
        if (k == 4) continue;
        const int dy = k / 3 - 1, dx = k % 3 - 1;
        const int delta = dy * pw + dx;
        const int lo = std::max(0, -delta);
        const int hi = std::min(total, total - delta);
        const int n = hi - lo;
        gx.middleCols(lo + delta, n).noalias() +=
            c.w.middleCols(k * c.in_ch, c.in_ch).transpose() * gy.middleCols(lo, n);
    }
    zero_guard_ring(gx, h, w);
}

// gw/gb are overwritten (tap 0 assigns, the rest accumulate).
template <class T>
void conv_shift_backward_params(const Conv3x3<T>& c, const MatX<T>& x, const MatX<T>& gy,
                                MatX<T>& gw, VecX<T>& gb, int h, int w) {
    const int pw = w + 2;
    const int total = padded_count(h, w);
    for (int k = 0; k < 9; ++k) {
        const int dy = k / 3 - 1, dx = k % 3 - 1;
        const int delta = dy * pw + dx;
        const int lo = std::max(0, -delta);
        const int hi = std::min(total, total - delta);
        const int n = hi - lo;
        // each tap owns a distinct column block, so plain assignment suffices
        gw.middleCols(k * c.in_ch, c.in_ch).noalias() =
            gy.middleCols(lo, n) * x.middleCols(lo + delta, n).transpose();
    }
    gb.noalias() = gy.rowwise().sum();
}

// Max pooling (ph x pw window, stride = window) from padded plane x
// (interior hi x wi) to padded plane y (interior hi/ph x wi/pw). idx records
// the source column of each channel's max; ties keep the first cell in
// (dy, dx) scan order.
template <class T>
void maxpool_forward(const MatX<T>& x, int hi, int wi, int ph, int pw, MatX<T>& y,
                     Eigen::MatrixXi& idx) {
    const int ho = hi / ph, wo = wi / pw;
    const int pwi = wi + 2;
    const int ch = static_cast<int>(x.rows());
    const int cells = ph * pw;
    int cols[4];
    for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
            int nc = 0;
            for (int dy = 0; dy < ph; ++dy)
                for (int dx = 0; dx < pw; ++dx)
                    cols[nc++] = (oy * ph + dy + 1) * pwi + (ox * pw + dx + 1);
            T* ydst = y.col(interior_col(oy, ox, wo)).data();
            int* icol = idx.col(oy * wo + ox).data();
            const T* src0 = x.col(cols[0]).data();
            for (int c = 0; c < ch; ++c) {
                ydst[c] = src0[c];
                icol[c] = cols[0];
            }
            for (int k = 1; k < cells; ++k) {
                const T* src = x.col(cols[k]).data();
                const int colk = cols[k];
                for (int c = 0; c < ch; ++c) {
                    if (src[c] > ydst[c]) {
                        ydst[c] = src[c];
                        icol[c] = colk;
                    }
                }
            }
        }
    }
}

// Writes every cell of every pool window (zero or the routed gradient), so
// the destination needs no pre-zeroing; its guard ring is never touched.
template <class T>
void maxpool_backward(const MatX<T>& gy, const Eigen::MatrixXi& idx, int ho, int wo, int ph,
                      int pw, MatX<T>& gx, int wi) {
    const int pwi = wi + 2;
    const int ch = static_cast<int>(gy.rows());
    const int cells = ph * pw;
    int cols[4];
    for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox) {
            int nc = 0;
            for (int dy = 0; dy < ph; ++dy)
                for (int dx = 0; dx < pw; ++dx)
                    cols[nc++] = (oy * ph + dy + 1) * pwi + (ox * pw + dx + 1);
            const T* g = gy.col(interior_col(oy, ox, wo)).data();
            const int* icol = idx.col(oy * wo + ox).data();
            for (int k = 0; k < cells; ++k) {
                T* dst = gx.col(cols[k]).data();
                const int colk = cols[k];
                for (int c = 0; c < ch; ++c) dst[c] = (icol[c] == colk) ? g[c] : T(0);
            }
        }
    }
}

template <class T>
void relu_inplace(MatX<T>& m) {
    m = m.cwiseMax(T(0));
}

// Keeps gradient where the cached post-ReLU activation is positive.
template <class T>
void relu_mask(const MatX<T>& post, MatX<T>& g) {
    T* gp = g.data();
    const T* pp = post.data();
    const ptrdiff_t n = static_cast<ptrdiff_t>(g.size());
    for (ptrdiff_t i = 0; i < n; ++i)
        if (!(pp[i] > T(0))) gp[i] = T(0);
}

}  // namespace detail

template <class T>
void resize_encoder_work(const EncoderParams<T>& p, int max_batch, EncoderBatchWork<T>& w) {
    const int h0 = p.in_h, w0 = p.in_w;
    const int h1 = h0, w1 = w0 / 2;
    const int h2 = h1 / 2, w2 = w1 / 2;
    const int h3 = h2 / 2, w3 = w2 / 2;
    w.max_batch = max_batch;
    w.acts.resize(max_batch);
    w.partial.resize(max_batch);
    for (int b = 0; b < max_batch; ++b) {
        auto& a = w.acts[b];
        a.x_planes = MatX<T>::Zero(padded_count(h0, w0), p.in_ch);
        a.patches1 = MatX<T>::Zero(padded_count(h0, w0), 9 * p.in_ch);
        a.r1.resize(p.conv_ch, padded_count(h0, w0));
        a.q1 = MatX<T>::Zero(p.conv_ch, padded_count(h1, w1));
        a.i1.resize(p.conv_ch, h1 * w1);
        a.r2.resize(p.conv_ch, padded_count(h1, w1));
        a.q2 = MatX<T>::Zero(p.conv_ch, padded_count(h2, w2));
        a.i2.resize(p.conv_ch, h2 * w2);
        a.r3.resize(p.conv_ch, padded_count(h2, w2));
        a.q3 = MatX<T>::Zero(p.conv_ch, padded_count(h3, w3));
        a.i3.resize(p.conv_ch, h3 * w3);
        auto& g = w.partial[b];
        g.w1.resize(p.conv_ch, 9 * p.in_ch);
        g.w2.resize(p.conv_ch, 9 * p.conv_ch);
        g.w3.resize(p.conv_ch, 9 * p.conv_ch);
        g.b1.resize(p.conv_ch);
        g.b2.resize(p.conv_ch);
        g.b3.resize(p.conv_ch);
    }
    w.scratch.resize(omp_get_max_threads());
    for (auto& s : w.scratch) {
        s.gq3 = MatX<T>::Zero(p.conv_ch, padded_count(h3, w3));
        s.gz3 = MatX<T>::Zero(p.conv_ch, padded_count(h2, w2));
        s.gq2 = MatX<T>::Zero(p.conv_ch, padded_count(h2, w2));
        s.gz2 = MatX<T>::Zero(p.conv_ch, padded_count(h1, w1));
        s.gq1 = MatX<T>::Zero(p.conv_ch, padded_count(h1, w1));
        s.gz1 = MatX<T>::Zero(p.conv_ch, padded_count(h0, w0));
    }
    w.flat.resize(p.flatten_dim(), max_batch);
    w.latent.resize(p.latent_dim, max_batch);
    w.grad_flat.resize(p.flatten_dim(), max_batch);
}

/**
 * Forward pass over a batch. contexts[b] points at an unpadded sample laid
 * out [channel][mel][frame] row-major with in_ch*in_h*in_w values. Leaves
 * the latent codes in w.latent (latent_dim x batch).
 */
template <class T>
void encoder_forward_batch(const EncoderParams<T>& p, const T* const* contexts, int batch,
                           EncoderBatchWork<T>& w) {
    const int h0 = p.in_h, w0 = p.in_w;
    const int h1 = h0, w1 = w0 / 2;
    const int h2 = h1 / 2, w2 = w1 / 2;
    const int h3 = h2 / 2, w3 = w2 / 2;
    const int pw0 = w0 + 2;
    const int total0 = padded_count(h0, w0);

#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        auto& a = w.acts[b];
        // pack the sample into per-channel padded planes
        for (int c = 0; c < p.in_ch; ++c) {
            const T* src = contexts[b] + static_cast<size_t>(c) * h0 * w0;
            T* plane = a.x_planes.col(c).data();
            for (int y = 0; y < h0; ++y)
                std::copy(src + static_cast<size_t>(y) * w0, src + static_cast<size_t>(y + 1) * w0,
                          plane + (y + 1) * pw0 + 1);
        }
        // conv1 patch matrix: column 3*k + c is channel c's plane shifted by tap k
        for (int k = 0; k < 9; ++k) {
            const int dy = k / 3 - 1, dx = k % 3 - 1;
            const int delta = dy * pw0 + dx;
            const int lo = std::max(0, -delta);
            const int hi = std::min(total0, total0 - delta);
            for (int c = 0; c < p.in_ch; ++c) {
                auto col = a.patches1.col(k * p.in_ch + c);
                col.segment(lo, hi - lo) = a.x_planes.col(c).segment(lo + delta, hi - lo);
            }
        }
        a.r1.noalias() = p.conv1.w * a.patches1.transpose();
        a.r1.colwise() += p.conv1.b;
        zero_guard_ring(a.r1, h0, w0);
        detail::relu_inplace(a.r1);
        detail::maxpool_forward(a.r1, h0, w0, 1, 2, a.q1, a.i1);

        detail::conv_shift_forward(p.conv2, a.q1, a.r2, h1, w1);
        detail::relu_inplace(a.r2);
        detail::maxpool_forward(a.r2, h1, w1, 2, 2, a.q2, a.i2);

        detail::conv_shift_forward(p.conv3, a.q2, a.r3, h2, w2);
        detail::relu_inplace(a.r3);
        detail::maxpool_forward(a.r3, h2, w2, 2, 2, a.q3, a.i3);

        // flatten q3 interior, channels fastest
        T* dst = w.flat.col(b).data();
        for (int y = 0; y < h3; ++y)
            for (int x = 0; x < w3; ++x) {
                const auto col = a.q3.col(interior_col(y, x, w3));
                std::copy(col.data(), col.data() + p.conv_ch,
                          dst + static_cast<size_t>(y * w3 + x) * p.conv_ch);
            }
    }
    auto latent = w.latent.leftCols(batch);
    gemm_rowblocks(latent, p.out.w, w.flat.leftCols(batch));
    latent.colwise() += p.out.b;
}

/**
 * Backward pass; call directly after encoder_forward_batch on the same work.
 * grad_latent must be latent_dim x batch. Overwrites all encoder gradients
 * in `grad`.
 */
template <class T>
void encoder_backward_batch(const EncoderParams<T>& p, const MatX<T>& grad_latent, int batch,
                            EncoderBatchWork<T>& w, EncoderParams<T>& grad) {
    const int h0 = p.in_h, w0 = p.in_w;
    const int h1 = h0, w1 = w0 / 2;
    const int h2 = h1 / 2, w2 = w1 / 2;
    const int h3 = h2 / 2, w3 = w2 / 2;

    gemm_rowblocks(grad.out.w, grad_latent, w.flat.leftCols(batch).transpose(), 64);
    grad.out.b.noalias() = grad_latent.rowwise().sum();
    auto gflat = w.grad_flat.leftCols(batch);
    gemm_rowblocks(gflat, p.out.w.transpose(), grad_latent, 4096);

#pragma omp parallel for schedule(static)
    for (int b = 0; b < batch; ++b) {
        auto& a = w.acts[b];
        auto& g = w.partial[b];
        auto& s = w.scratch[omp_get_thread_num()];

        // unflatten into gq3 (interior only; guards stay zero from alloc)
        const T* src = w.grad_flat.col(b).data();
        for (int y = 0; y < h3; ++y)
            for (int x = 0; x < w3; ++x)
                s.gq3.col(interior_col(y, x, w3)) = Eigen::Map<const VecX<T>>(
                    src + static_cast<size_t>(y * w3 + x) * p.conv_ch, p.conv_ch);

        detail::maxpool_backward(s.gq3, a.i3, h3, w3, 2, 2, s.gz3, w2);
        detail::relu_mask(a.r3, s.gz3);
        detail::conv_shift_backward_params(p.conv3, a.q2, s.gz3, g.w3, g.b3, h2, w2);
        detail::conv_shift_backward_input(p.conv3, s.gz3, s.gq2, h2, w2);

        detail::maxpool_backward(s.gq2, a.i2, h2, w2, 2, 2, s.gz2, w1);
        detail::relu_mask(a.r2, s.gz2);
        detail::conv_shift_backward_params(p.conv2, a.q1, s.gz2, g.w2, g.b2, h1, w1);
        detail::conv_shift_backward_input(p.conv2, s.gz2, s.gq1, h1, w1);

        detail::maxpool_backward(s.gq1, a.i1, h1, w1, 1, 2, s.gz1, w0);
        detail::relu_mask(a.r1, s.gz1);
        // conv1 parameter grads via the cached patch matrix
        g.w1.noalias() = s.gz1 * a.patches1;
        g.b1.noalias() = s.gz1.rowwise().sum();
    }

    // fixed-order reduction keeps results independent of thread count
    grad.conv1.w = w.partial[0].w1;
    grad.conv1.b = w.partial[0].b1;
    grad.conv2.w = w.partial[0].w2;
    grad.conv2.b = w.partial[0].b2;
    grad.conv3.w = w.partial[0].w3;
    grad.conv3.b = w.partial[0].b3;
    for (int b = 1; b < batch; ++b) {
        const auto& g = w.partial[b];
        grad.conv1.w += g.w1;
        grad.conv1.b += g.b1;
        grad.conv2.w += g.w2;
        grad.conv2.b += g.b2;
        grad.conv3.w += g.w3;
        grad.conv3.b += g.b3;
    }
}

template <class T>
void synthesizer_forward_batch(const SynthesizerParams<T>& p, const MatX<T>& prev,
                               const MatX<T>& latent, int batch, SynthBatchWork<T>& w) {
    w.in.resize(p.in_dim(), batch);
    w.in.topRows(p.packet_dim) = prev.leftCols(batch);
    w.in.bottomRows(p.latent_dim) = latent.leftCols(batch);
    auto dense = [](const Linear<T>& l, const MatX<T>& x, MatX<T>& y, bool relu) {
        y.resize(l.w.rows(), x.cols());
        y.noalias() = l.w * x;
        y.colwise() += l.b;
        if (relu) y = y.cwiseMax(T(0));
    };
    dense(p.fc1, w.in, w.h1, true);
    dense(p.fc2, w.h1, w.h2, true);
    dense(p.fc3, w.h2, w.h3, true);
    w.out.resize(p.packet_dim, batch);
    w.out.noalias() = p.out.w * w.h3;
    w.out.colwise() += p.out.b;
    w.out = w.out.array().tanh();
}

/// grad_out is d(loss)/d(packet). Overwrites all synthesizer gradients;
/// optionally returns d(loss)/d(latent). The previous-packet gradient is
/// discarded (that input is data, not a learnable path).
template <class T>
void synthesizer_backward_batch(const SynthesizerParams<T>& p, const MatX<T>& grad_out,
                                SynthBatchWork<T>& w, SynthesizerParams<T>& grad,
                                MatX<T>* grad_latent) {
    // through tanh: dz = g * (1 - out^2)
    w.gz = grad_out.array() * (T(1) - w.out.array().square());
    grad.out.w.noalias() = w.gz * w.h3.transpose();
    grad.out.b.noalias() = w.gz.rowwise().sum();
    MatX<T> gh = p.out.w.transpose() * w.gz;

    auto through = [](Linear<T>& gl, const MatX<T>& post, const MatX<T>& input, MatX<T>& gpost) {
        detail::relu_mask(post, gpost);
        gl.w.noalias() = gpost * input.transpose();
        gl.b.noalias() = gpost.rowwise().sum();
    };
    through(grad.fc3, w.h3, w.h2, gh);
    MatX<T> gh2 = p.fc3.w.transpose() * gh;
    through(grad.fc2, w.h2, w.h1, gh2);
    MatX<T> gh1 = p.fc2.w.transpose() * gh2;
    through(grad.fc1, w.h1, w.in, gh1);
    if (grad_latent) {
        MatX<T> gin = p.fc1.w.transpose() * gh1;
        *grad_latent = gin.bottomRows(p.latent_dim);
    }
}

}  // namespace plclab::nn
