#pragma once

// Peripheral prediction padding: each border row/column of the pad-1 frame is
// predicted from the h_p-deep strip adjacent to that edge by a three-stage
// bias-free conv stack (1 x w_p, then two 1x1), shared across feature
// channels. Channel sharing is realized by permuting the strip so depth
// becomes the channel axis and (C, L) become spatial; the same filters then
// slide over every feature channel.

#include <array>
#include <functional>

#include "pppad/ops.hpp"
#include "pppad/tensor.hpp"

namespace pppad {

struct PPPadConfig {
    int h_p = 2;  // strip depth, pixels into the map perpendicular to the edge
    int w_p = 3;  // window extent along the edge, odd
    int n = 8;    // intermediate channels

    void validate() const {
        require_arg(h_p >= 1, "pp-pad: h_p must be >= 1");
        require_arg(w_p >= 3 && w_p % 2 == 1, "pp-pad: w_p must be odd and >= 3");
        require_arg(n >= 1, "pp-pad: n must be >= 1");
    }
};

enum class Edge { Top, Bottom, Left, Right };

inline constexpr std::array<Edge, 4> kEdges = {Edge::Top, Edge::Bottom,
                                               Edge::Left, Edge::Right};

inline const char* edge_name(Edge e) {
    switch (e) {
        case Edge::Top: return "top";
        case Edge::Bottom: return "bottom";
        case Edge::Left: return "left";
        case Edge::Right: return "right";
    }
    return "?";
}

// w1: (n, h_p, 1, w_p); w2: (n, n, 1, 1); w3: (1, n, 1, 1); all bias-free,
// so the stored weight count is n*h_p*w_p + n^2 + n.
template <typename T>
struct EdgePredictorT {
    ConvKernelT<T> w1, w2, w3;

    static EdgePredictorT make(const PPPadConfig& cfg) {
        cfg.validate();
        EdgePredictorT p;
        p.w1 = ConvKernelT<T>(cfg.n, cfg.h_p, 1, cfg.w_p, false);
        p.w2 = ConvKernelT<T>(cfg.n, cfg.n, 1, 1, false);
        p.w3 = ConvKernelT<T>(1, cfg.n, 1, 1, false);
        return p;
    }

    size_t weight_count() const {
        return w1.weight_count() + w2.weight_count() + w3.weight_count();
    }

    void for_each_kernel(const std::function<void(ConvKernelT<T>&)>& fn) {
        fn(w1);
        fn(w2);
        fn(w3);
    }
};

// Independent parameters for the four edges; nothing is shared between edges
// or between network layers.
template <typename T>
struct PPPadLayerT {
    EdgePredictorT<T> top, bottom, left, right;

    static PPPadLayerT make(const PPPadConfig& cfg) {
        PPPadLayerT l;
        l.top = EdgePredictorT<T>::make(cfg);
        l.bottom = EdgePredictorT<T>::make(cfg);
        l.left = EdgePredictorT<T>::make(cfg);
        l.right = EdgePredictorT<T>::make(cfg);
        return l;
    }

    EdgePredictorT<T>& edge(Edge e) {
        switch (e) {
            case Edge::Top: return top;
            case Edge::Bottom: return bottom;
            case Edge::Left: return left;
            default: return right;
        }
    }
    const EdgePredictorT<T>& edge(Edge e) const {
        return const_cast<PPPadLayerT*>(this)->edge(e);
    }

    // serialization and update order: (top, bottom, left, right) x (w1, w2, w3)
    void for_each_kernel(const std::function<void(ConvKernelT<T>&)>& fn) {
        for (Edge e : kEdges) edge(e).for_each_kernel(fn);
    }

    // All-zero init predicts exactly zero padding but has zero gradient
    // through ReLU(0); small uniform init keeps gradients alive while staying
    // close to zero padding.
    void init_uniform(Rng& rng, T scale) {
        for_each_kernel([&](ConvKernelT<T>& k) {
            fill_uniform(k.w, rng, -double(scale), double(scale));
        });
    }

    size_t weight_count() const {
        return top.weight_count() + bottom.weight_count() +
               left.weight_count() + right.weight_count();
    }
};

using PPPadLayer = PPPadLayerT<float>;

// Channel-shared parameter count per edge predictor, or the count an
// equivalent unshared (per-channel) model would need.
inline long long param_count(const PPPadConfig& cfg, int channels, bool naive) {
    const long long n = cfg.n, hp = cfg.h_p, wp = cfg.w_p, C = channels;
    if (naive) return n * hp * wp * C + n * n + n * C;
    return n * hp * wp + n * n + n;
}

// Canonical strip (N, C, h_p, L): depth index 0 is the row/column nearest the
// edge, the sliding axis runs in increasing coordinate order.
template <typename T>
TensorT<T> extract_edge_strip(const TensorT<T>& fm, Edge e, int h_p) {
    const bool horizontal = (e == Edge::Top || e == Edge::Bottom);
    const int L = horizontal ? fm.w : fm.h;
    require_dim(h_p <= (horizontal ? fm.h : fm.w),
                "pp-pad: strip depth h_p does not fit the feature map");

    TensorT<T> strip(fm.n, fm.c, h_p, L);
    for (int b = 0; b < fm.n; ++b)
        for (int ci = 0; ci < fm.c; ++ci)
            for (int d = 0; d < h_p; ++d)
                for (int j = 0; j < L; ++j) {
                    T v;
                    switch (e) {
                        case Edge::Top: v = fm.at(b, ci, d, j); break;
                        case Edge::Bottom: v = fm.at(b, ci, fm.h - 1 - d, j); break;
                        case Edge::Left: v = fm.at(b, ci, j, d); break;
                        default: v = fm.at(b, ci, j, fm.w - 1 - d); break;
                    }
                    strip.at(b, ci, d, j) = v;
                }
    return strip;
}

// Adjoint of extract_edge_strip: accumulate strip gradients back onto the map.
template <typename T>
void scatter_edge_strip(TensorT<T>& grad_fm, const TensorT<T>& grad_strip,
                        Edge e, int h_p) {
    const bool horizontal = (e == Edge::Top || e == Edge::Bottom);
    const int L = horizontal ? grad_fm.w : grad_fm.h;
    require_dim(grad_strip.h == h_p && grad_strip.w == L &&
                    grad_strip.n == grad_fm.n && grad_strip.c == grad_fm.c,
                "pp-pad: strip gradient shape mismatch");
    for (int b = 0; b < grad_fm.n; ++b)
        for (int ci = 0; ci < grad_fm.c; ++ci)
            for (int d = 0; d < h_p; ++d)
                for (int j = 0; j < L; ++j) {
                    const T g = grad_strip.at(b, ci, d, j);
                    switch (e) {
                        case Edge::Top: grad_fm.at(b, ci, d, j) += g; break;
                        case Edge::Bottom: grad_fm.at(b, ci, grad_fm.h - 1 - d, j) += g; break;
                        case Edge::Left: grad_fm.at(b, ci, j, d) += g; break;
                        default: grad_fm.at(b, ci, j, grad_fm.w - 1 - d) += g; break;
                    }
                }
}

// Saved forward activations for the backward pass.
template <typename T>
struct EdgeCacheT {
    TensorT<T> x0;          // permuted strip (N, h_p, C, L)
    TensorT<T> pre1, act1;  // conv1 pre/post ReLU (N, n, C, L')
    TensorT<T> pre2, act2;
    TensorT<T> pre3;        // (N, 1, C, L')
};

// depth axis <-> channel axis; (C, L) become the spatial face
inline constexpr std::array<int, 4> kStripPerm = {0, 2, 1, 3};

// Predicted padding values for one edge: (N, C, 1, L - w_p + 1).
template <typename T>
TensorT<T> predict_edge(const TensorT<T>& fm, Edge e,
                        const EdgePredictorT<T>& pred, const PPPadConfig& cfg,
                        EdgeCacheT<T>* cache = nullptr) {
    cfg.validate();
    const bool horizontal = (e == Edge::Top || e == Edge::Bottom);
    const int L = horizontal ? fm.w : fm.h;
    require_dim(L >= cfg.w_p, "pp-pad: edge shorter than the w_p window");

    TensorT<T> x0 = permute_axes(extract_edge_strip(fm, e, cfg.h_p), kStripPerm);
    TensorT<T> pre1 = conv2d_valid(x0, pred.w1, 1);
    TensorT<T> act1 = relu(pre1);
    TensorT<T> pre2 = conv2d_valid(act1, pred.w2, 1);
    TensorT<T> act2 = relu(pre2);
    TensorT<T> pre3 = conv2d_valid(act2, pred.w3, 1);
    TensorT<T> out = permute_axes(relu(pre3), kStripPerm);
    if (cache) {
        cache->x0 = std::move(x0);
        cache->pre1 = std::move(pre1);
        cache->act1 = std::move(act1);
        cache->pre2 = std::move(pre2);
        cache->act2 = std::move(act2);
        cache->pre3 = std::move(pre3);
    }
    return out;
}

template <typename T>
struct EdgeGradsT {
    TensorT<T> strip;  // gradient w.r.t. the canonical strip
    ConvKernelT<T> w1, w2, w3;
};

template <typename T>
EdgeGradsT<T> predict_edge_backward(const TensorT<T>& grad_out,
                                    const EdgeCacheT<T>& cache,
                                    const EdgePredictorT<T>& pred) {
    TensorT<T> g3 = relu_backward(permute_axes(grad_out, kStripPerm), cache.pre3);
    ConvGradsT<T> c3 = conv2d_backward(g3, cache.act2, pred.w3, 1);
    TensorT<T> g2 = relu_backward(c3.input, cache.pre2);
    ConvGradsT<T> c2 = conv2d_backward(g2, cache.act1, pred.w2, 1);
    TensorT<T> g1 = relu_backward(c2.input, cache.pre1);
    ConvGradsT<T> c1 = conv2d_backward(g1, cache.x0, pred.w1, 1);

    EdgeGradsT<T> g;
    g.strip = permute_axes(c1.input, kStripPerm);
    g.w1 = std::move(c1.kernel);
    g.w2 = std::move(c2.kernel);
    g.w3 = std::move(c3.kernel);
    return g;
}

// Number of zeroed cells at each end of a predicted edge row/column
// (1 frame cell + (w_p-1)/2 cells the window cannot reach).
inline int pp_end_gap(const PPPadConfig& cfg) { return 1 + (cfg.w_p - 1) / 2; }

// Pad-1 frame around fm: interior preserved bit-exactly, each edge filled by
// its predictor, corners and the end pixels of each edge set to 0.
template <typename T>
TensorT<T> pp_pad(const TensorT<T>& fm, const PPPadLayerT<T>& layer,
                  const PPPadConfig& cfg) {
    cfg.validate();
    const int need = std::max(cfg.h_p, cfg.w_p);
    require_dim(fm.h >= need && fm.w >= need,
                "pp-pad: feature map smaller than the predictor footprint");

    TensorT<T> out(fm.n, fm.c, fm.h + 2, fm.w + 2);
    for (int b = 0; b < fm.n; ++b)
        for (int ci = 0; ci < fm.c; ++ci)
            for (int y = 0; y < fm.h; ++y)
                for (int x = 0; x < fm.w; ++x)
                    out.at(b, ci, y + 1, x + 1) = fm.at(b, ci, y, x);

    const int gap = pp_end_gap(cfg);
    for (Edge e : kEdges) {
        const TensorT<T> p = predict_edge(fm, e, layer.edge(e), cfg);
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

template <typename T>
struct PPPadGradsT {
    TensorT<T> fm;             // central crop plus strip contributions
    PPPadLayerT<T> layer;      // kernel-shaped gradients per edge
};

// Adjoint of pp_pad. Gradients arriving at corner/end cells are discarded
// (those outputs are constants); edge-cell gradients flow back through the
// predictors into their source strips and weights.
template <typename T>
PPPadGradsT<T> pp_pad_backward(const TensorT<T>& grad_padded,
                               const TensorT<T>& fm,
                               const PPPadLayerT<T>& layer,
                               const PPPadConfig& cfg) {
    cfg.validate();
    require_dim(grad_padded.n == fm.n && grad_padded.c == fm.c &&
                    grad_padded.h == fm.h + 2 && grad_padded.w == fm.w + 2,
                "pp_pad_backward: grad shape mismatch");

    PPPadGradsT<T> g;
    g.fm = TensorT<T>(fm.n, fm.c, fm.h, fm.w);
    g.layer = PPPadLayerT<T>::make(cfg);

    for (int b = 0; b < fm.n; ++b)
        for (int ci = 0; ci < fm.c; ++ci)
            for (int y = 0; y < fm.h; ++y)
                for (int x = 0; x < fm.w; ++x)
                    g.fm.at(b, ci, y, x) = grad_padded.at(b, ci, y + 1, x + 1);

    const int gap = pp_end_gap(cfg);
    for (Edge e : kEdges) {
        const bool horizontal = (e == Edge::Top || e == Edge::Bottom);
        const int L = horizontal ? fm.w : fm.h;
        const int plen = L - cfg.w_p + 1;

        TensorT<T> gp(fm.n, fm.c, 1, plen);
        for (int b = 0; b < fm.n; ++b)
            for (int ci = 0; ci < fm.c; ++ci)
                for (int j = 0; j < plen; ++j) {
                    T v;
                    switch (e) {
                        case Edge::Top: v = grad_padded.at(b, ci, 0, j + gap); break;
                        case Edge::Bottom: v = grad_padded.at(b, ci, fm.h + 1, j + gap); break;
                        case Edge::Left: v = grad_padded.at(b, ci, j + gap, 0); break;
                        default: v = grad_padded.at(b, ci, j + gap, fm.w + 1); break;
                    }
                    gp.at(b, ci, 0, j) = v;
                }

        EdgeCacheT<T> cache;
        predict_edge(fm, e, layer.edge(e), cfg, &cache);
        EdgeGradsT<T> eg = predict_edge_backward(gp, cache, layer.edge(e));
        scatter_edge_strip(g.fm, eg.strip, e, cfg.h_p);
        g.layer.edge(e).w1 = std::move(eg.w1);
        g.layer.edge(e).w2 = std::move(eg.w2);
        g.layer.edge(e).w3 = std::move(eg.w3);
    }
    return g;
}

}  // namespace pppad
