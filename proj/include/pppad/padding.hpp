#pragma once

// Classic padding operators with exact adjoints, plus the partial-convolution
// baseline (border rescaling by full-window / valid-window cell counts).

#include <string>
#include <string_view>

#include "pppad/ops.hpp"
#include "pppad/tensor.hpp"

namespace pppad {

enum class PadMode { Zero, Reflect, Replicate, Circular, Partial, PPPad };

inline const char* pad_mode_name(PadMode m) {
    switch (m) {
        case PadMode::Zero: return "zero";
        case PadMode::Reflect: return "reflect";
        case PadMode::Replicate: return "replicate";
        case PadMode::Circular: return "circular";
        case PadMode::Partial: return "partial";
        case PadMode::PPPad: return "pp-pad";
    }
    return "?";
}

inline PadMode pad_mode_from_string(std::string_view s) {
    if (s == "zero") return PadMode::Zero;
    if (s == "reflect") return PadMode::Reflect;
    if (s == "replicate") return PadMode::Replicate;
    if (s == "circular") return PadMode::Circular;
    if (s == "partial") return PadMode::Partial;
    if (s == "pp-pad") return PadMode::PPPad;
    throw ArgError("unknown padding mode: " + std::string(s));
}

// True for the modes pad()/pad_backward() accept directly.
inline bool is_value_pad(PadMode m) {
    return m == PadMode::Zero || m == PadMode::Reflect ||
           m == PadMode::Replicate || m == PadMode::Circular;
}

// Source index along one axis for padded coordinate t in [-p, extent+p).
// Returns -1 where zero padding writes a constant. Reflect mirrors about the
// edge excluding the edge element itself: [1,2,3] -> [2,1,2,3,2].
inline int pad_src_index(PadMode m, int t, int extent) {
    if (t >= 0 && t < extent) return t;
    switch (m) {
        case PadMode::Zero:
            return -1;
        case PadMode::Replicate:
            return t < 0 ? 0 : extent - 1;
        case PadMode::Circular:
            return ((t % extent) + extent) % extent;
        case PadMode::Reflect:
            return t < 0 ? -t : 2 * (extent - 1) - t;
        default:
            throw ArgError("pad_src_index: not a value pad mode");
    }
}

template <typename T>
TensorT<T> pad(const TensorT<T>& in, PadMode mode, int p) {
    require_arg(is_value_pad(mode), "pad: mode must be zero/reflect/replicate/circular");
    require_arg(p >= 0, "pad: negative pad width");
    if (mode == PadMode::Reflect)
        require_arg(p <= std::min(in.h, in.w) - 1,
                    "pad: reflect requires p <= min(H,W)-1");

    TensorT<T> out(in.n, in.c, in.h + 2 * p, in.w + 2 * p);
    const size_t planes = size_t(in.n) * in.c;
#pragma omp parallel for schedule(static) \
    if (parallel::enabled() && out.size() >= parallel::kGrain)
    for (size_t pl = 0; pl < planes; ++pl) {
        const int b = int(pl / in.c);
        const int ci = int(pl % in.c);
        for (int y = 0; y < out.h; ++y) {
            const int sy = pad_src_index(mode, y - p, in.h);
            for (int x = 0; x < out.w; ++x) {
                const int sx = pad_src_index(mode, x - p, in.w);
                out.at(b, ci, y, x) =
                    (sy < 0 || sx < 0) ? T(0) : in.at(b, ci, sy, sx);
            }
        }
    }
    return out;
}

// Exact adjoint of pad: every padded cell's gradient accumulates onto the
// source element it was copied from (zero mode just crops).
template <typename T>
TensorT<T> pad_backward(const TensorT<T>& grad_padded, PadMode mode, int p,
                        int orig_h, int orig_w) {
    require_arg(is_value_pad(mode), "pad_backward: not a value pad mode");
    require_dim(grad_padded.h == orig_h + 2 * p && grad_padded.w == orig_w + 2 * p,
                "pad_backward: grad shape does not match original + 2p");

    TensorT<T> g(grad_padded.n, grad_padded.c, orig_h, orig_w);
    const size_t planes = size_t(g.n) * g.c;
#pragma omp parallel for schedule(static) \
    if (parallel::enabled() && grad_padded.size() >= parallel::kGrain)
    for (size_t pl = 0; pl < planes; ++pl) {
        const int b = int(pl / g.c);
        const int ci = int(pl % g.c);
        // fixed row-major scatter order within the plane
        for (int y = 0; y < grad_padded.h; ++y) {
            const int sy = pad_src_index(mode, y - p, orig_h);
            if (sy < 0) continue;
            for (int x = 0; x < grad_padded.w; ++x) {
                const int sx = pad_src_index(mode, x - p, orig_w);
                if (sx < 0) continue;
                g.at(b, ci, sy, sx) += grad_padded.at(b, ci, y, x);
            }
        }
    }
    return g;
}

// Scale factor map (1,1,Ho,Wo) for partial convolution: full window size
// divided by the number of window cells lying inside the original image.
// Positions whose window misses the image entirely get scale 0.
template <typename T>
TensorT<T> partial_scale_map(int h, int w, int kh, int kw, int p) {
    const int oh = h + 2 * p - kh + 1;
    const int ow = w + 2 * p - kw + 1;
    require_dim(oh >= 1 && ow >= 1, "partial_scale_map: kernel larger than padded input");
    TensorT<T> scale(1, 1, oh, ow);
    const T full = T(kh) * T(kw);
    for (int oy = 0; oy < oh; ++oy) {
        // window covers padded rows [oy, oy+kh); image occupies [p, p+h)
        const int ry = std::min(oy + kh, p + h) - std::max(oy, p);
        for (int ox = 0; ox < ow; ++ox) {
            const int rx = std::min(ox + kw, p + w) - std::max(ox, p);
            const int n_valid = std::max(ry, 0) * std::max(rx, 0);
            scale.at(0, 0, oy, ox) = n_valid > 0 ? full / T(n_valid) : T(0);
        }
    }
    return scale;
}

// Zero-pad by p, convolve without bias, rescale each output by
// kh*kw / n_valid(position), then add bias. Interior outputs equal the plain
// zero-pad convolution.
template <typename T>
TensorT<T> partial_conv2d(const TensorT<T>& in, const ConvKernelT<T>& k, int p) {
    require_arg(p >= 1, "partial_conv2d: p must be >= 1");
    require_arg(k.kh % 2 == 1 && k.kw % 2 == 1, "partial_conv2d: kernel must be odd-sized");

    ConvKernelT<T> nobias = k;
    nobias.has_bias = false;
    nobias.bias.clear();

    TensorT<T> out = conv2d_valid(pad(in, PadMode::Zero, p), nobias, 1);
    const TensorT<T> scale = partial_scale_map<T>(in.h, in.w, k.kh, k.kw, p);

    const size_t total = out.size();
#pragma omp parallel for schedule(static) \
    if (parallel::enabled() && total >= parallel::kGrain)
    for (size_t i = 0; i < total; ++i) {
        const size_t pos = i % (size_t(out.h) * out.w);
        out.data[i] *= scale.data[pos];
    }
    if (k.has_bias) {
        for (int b = 0; b < out.n; ++b)
            for (int o = 0; o < out.c; ++o)
                for (int y = 0; y < out.h; ++y)
                    for (int x = 0; x < out.w; ++x)
                        out.at(b, o, y, x) += k.bias[o];
    }
    return out;
}

template <typename T>
ConvGradsT<T> partial_conv2d_backward(const TensorT<T>& grad_out,
                                      const TensorT<T>& in,
                                      const ConvKernelT<T>& k, int p) {
    require_arg(p >= 1, "partial_conv2d_backward: p must be >= 1");
    require_arg(k.kh % 2 == 1 && k.kw % 2 == 1,
                "partial_conv2d_backward: kernel must be odd-sized");

    const TensorT<T> scale = partial_scale_map<T>(in.h, in.w, k.kh, k.kw, p);
    require_dim(grad_out.h == scale.h && grad_out.w == scale.w &&
                    grad_out.n == in.n && grad_out.c == k.out_ch,
                "partial_conv2d_backward: grad_out shape mismatch");

    // scale is constant geometry: d/dx (scale * conv) = conv_backward(scale * g)
    TensorT<T> gconv(grad_out.n, grad_out.c, grad_out.h, grad_out.w);
    for (size_t i = 0; i < gconv.size(); ++i) {
        const size_t pos = i % (size_t(grad_out.h) * grad_out.w);
        gconv.data[i] = grad_out.data[i] * scale.data[pos];
    }

    ConvKernelT<T> nobias = k;
    nobias.has_bias = false;
    nobias.bias.clear();

    const TensorT<T> padded = pad(in, PadMode::Zero, p);
    ConvGradsT<T> inner = conv2d_backward(gconv, padded, nobias, 1);

    ConvGradsT<T> g;
    g.input = pad_backward(inner.input, PadMode::Zero, p, in.h, in.w);
    g.kernel = ConvKernelT<T>(k.out_ch, k.in_ch, k.kh, k.kw, k.has_bias);
    g.kernel.w = std::move(inner.kernel.w);
    if (k.has_bias) {
        // bias is added after rescaling, so its grad is the raw grad_out sum
        for (int o = 0; o < k.out_ch; ++o) {
            T acc = 0;
            for (int b = 0; b < grad_out.n; ++b)
                for (int y = 0; y < grad_out.h; ++y)
                    for (int x = 0; x < grad_out.w; ++x)
                        acc += grad_out.at(b, o, y, x);
            g.kernel.bias[o] = acc;
        }
    }
    return g;
}

}  // namespace pppad
