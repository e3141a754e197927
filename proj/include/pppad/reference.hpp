#pragma once

// Serial reference kernels. These deliberately take different routes than the
// OpenMP implementations (scatter instead of gather backward, separable pad
// composition, per-channel edge prediction without the permutation trick) so
// the two sides check each other. The benchmark target times both.

#include "pppad/ops.hpp"
#include "pppad/padding.hpp"
#include "pppad/pp_pad.hpp"
#include "pppad/tensor.hpp"

namespace pppad::ref {

// Same accumulation order as the parallel kernel, so results must match
// bit for bit.
template <typename T>
TensorT<T> conv2d_valid(const TensorT<T>& in, const ConvKernelT<T>& k,
                        int stride = 1) {
    require_arg(stride >= 1, "conv2d_valid: stride must be >= 1");
    require_dim(in.c == k.in_ch, "conv2d_valid: channel mismatch");
    require_dim(in.h >= k.kh && in.w >= k.kw, "conv2d_valid: input smaller than kernel");
    const int oh = (in.h - k.kh) / stride + 1;
    const int ow = (in.w - k.kw) / stride + 1;
    TensorT<T> out(in.n, k.out_ch, oh, ow);
    for (int b = 0; b < in.n; ++b)
        for (int o = 0; o < k.out_ch; ++o)
            for (int oy = 0; oy < oh; ++oy)
                for (int ox = 0; ox < ow; ++ox) {
                    T acc = 0;
                    for (int ci = 0; ci < k.in_ch; ++ci)
                        for (int ky = 0; ky < k.kh; ++ky)
                            for (int kx = 0; kx < k.kw; ++kx)
                                acc += in.at(b, ci, oy * stride + ky, ox * stride + kx) *
                                       k.wat(o, ci, ky, kx);
                    if (k.has_bias) acc += k.bias[size_t(o)];
                    out.at(b, o, oy, ox) = acc;
                }
    return out;
}

// Scatter-style backward: walk output positions and push contributions out.
// Accumulation order differs from the gather kernel, so tests compare with a
// tolerance rather than bitwise.
template <typename T>
ConvGradsT<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& in,
                              const ConvKernelT<T>& k, int stride = 1) {
    require_dim(grad_out.n == in.n && grad_out.c == k.out_ch,
                "conv2d_backward: grad shape mismatch");
    ConvGradsT<T> g;
    g.input = TensorT<T>(in.n, in.c, in.h, in.w);
    g.kernel = ConvKernelT<T>(k.out_ch, k.in_ch, k.kh, k.kw, k.has_bias);
    for (int b = 0; b < in.n; ++b)
        for (int o = 0; o < k.out_ch; ++o)
            for (int oy = 0; oy < grad_out.h; ++oy)
                for (int ox = 0; ox < grad_out.w; ++ox) {
                    const T go = grad_out.at(b, o, oy, ox);
                    if (k.has_bias) g.kernel.bias[size_t(o)] += go;
                    for (int ci = 0; ci < k.in_ch; ++ci)
                        for (int ky = 0; ky < k.kh; ++ky)
                            for (int kx = 0; kx < k.kw; ++kx) {
                                const int iy = oy * stride + ky;
                                const int ix = ox * stride + kx;
                                g.input.at(b, ci, iy, ix) += go * k.wat(o, ci, ky, kx);
                                g.kernel.wat(o, ci, ky, kx) += go * in.at(b, ci, iy, ix);
                            }
                }
    return g;
}

// Pad columns first, then rows of the widened intermediate. For these modes
// the two axes are independent, so the composition agrees with the one-shot
// kernel exactly.
template <typename T>
TensorT<T> pad(const TensorT<T>& in, PadMode mode, int p) {
    require_arg(p >= 0, "pad: negative width");
    require_arg(mode != PadMode::Partial && mode != PadMode::PPPad,
                "pad: not an index-mapped mode");
    if (mode == PadMode::Reflect)
        require_dim(p <= std::min(in.h, in.w) - 1, "pad: reflect width too large");

    TensorT<T> mid(in.n, in.c, in.h, in.w + 2 * p);
    for (int b = 0; b < in.n; ++b)
        for (int ci = 0; ci < in.c; ++ci)
            for (int y = 0; y < in.h; ++y)
                for (int x = 0; x < mid.w; ++x) {
                    const int sx = pad_src_index(mode, x - p, in.w);
                    mid.at(b, ci, y, x) = sx < 0 ? T(0) : in.at(b, ci, y, sx);
                }
    TensorT<T> out(in.n, in.c, in.h + 2 * p, in.w + 2 * p);
    for (int b = 0; b < in.n; ++b)
        for (int ci = 0; ci < in.c; ++ci)
            for (int y = 0; y < out.h; ++y) {
                const int sy = pad_src_index(mode, y - p, in.h);
                for (int x = 0; x < out.w; ++x)
                    out.at(b, ci, y, x) = sy < 0 ? T(0) : mid.at(b, ci, sy, x);
            }
    return out;
}

// Edge prediction written as the naive per-channel loop the channel-sharing
// trick is equivalent to: the same n filters run over every feature channel.
template <typename T>
TensorT<T> predict_edge_naive(const TensorT<T>& fm, Edge e,
                              const EdgePredictorT<T>& pred,
                              const PPPadConfig& cfg) {
    cfg.validate();
    const TensorT<T> strip = extract_edge_strip(fm, e, cfg.h_p);
    const int L = strip.w;
    require_dim(L >= cfg.w_p, "predict_edge: edge shorter than the w_p window");
    const int plen = L - cfg.w_p + 1;
    const int n = cfg.n;

    TensorT<T> out(fm.n, fm.c, 1, plen);
    std::vector<T> y1(static_cast<size_t>(n));
    std::vector<T> y2(static_cast<size_t>(n));
    for (int b = 0; b < fm.n; ++b)
        for (int ci = 0; ci < fm.c; ++ci)
            for (int j = 0; j < plen; ++j) {
                for (int m = 0; m < n; ++m) {
                    T acc = 0;
                    for (int d = 0; d < cfg.h_p; ++d)
                        for (int dx = 0; dx < cfg.w_p; ++dx)
                            acc += strip.at(b, ci, d, j + dx) * pred.w1.wat(m, d, 0, dx);
                    y1[size_t(m)] = acc > T(0) ? acc : T(0);
                }
                for (int m = 0; m < n; ++m) {
                    T acc = 0;
                    for (int q = 0; q < n; ++q) acc += y1[size_t(q)] * pred.w2.wat(m, q, 0, 0);
                    y2[size_t(m)] = acc > T(0) ? acc : T(0);
                }
                T acc = 0;
                for (int q = 0; q < n; ++q) acc += y2[size_t(q)] * pred.w3.wat(0, q, 0, 0);
                out.at(b, ci, 0, j) = acc > T(0) ? acc : T(0);
            }
    return out;
}

template <typename T>
TensorT<T> pp_pad(const TensorT<T>& fm, const PPPadLayerT<T>& layer,
                  const PPPadConfig& cfg) {
    cfg.validate();
    TensorT<T> out(fm.n, fm.c, fm.h + 2, fm.w + 2);
    for (int b = 0; b < fm.n; ++b)
        for (int ci = 0; ci < fm.c; ++ci)
            for (int y = 0; y < fm.h; ++y)
                for (int x = 0; x < fm.w; ++x)
                    out.at(b, ci, y + 1, x + 1) = fm.at(b, ci, y, x);
    const int gap = pp_end_gap(cfg);
    for (Edge e : kEdges) {
        const TensorT<T> p = predict_edge_naive(fm, e, layer.edge(e), cfg);
        for (int b = 0; b < fm.n; ++b)
            for (int ci = 0; ci < fm.c; ++ci)
                for (int j = 0; j < p.w; ++j) {
                    const T v = p.at(b, ci, 0, j);
                    switch (e) {
                        case Edge::Top: out.at(b, ci, 0, j + gap) = v; break;
                        case Edge::Bottom: out.at(b, ci, fm.h + 1, j + gap) = v; break;
                        case Edge::Left: out.at(b, ci, j + gap, 0) = v; break;
                        default: out.at(b, ci, j + gap, fm.w + 1) = v; break;
                    }
                }
    }
    return out;
}

}  // namespace pppad::ref
