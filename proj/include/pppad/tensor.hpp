#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pppad {

// Shape or rank violations between tensors/kernels.
struct DimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid argument values (bad mode string, stride 0, label out of range, ...).
struct ArgError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require_dim(bool cond, const std::string& msg) {
    if (!cond) throw DimError(msg);
}

inline void require_arg(bool cond, const std::string& msg) {
    if (!cond) throw ArgError(msg);
}

// SplitMix64. All randomness in the project flows through this so that
// outputs are reproducible across platforms and standard libraries.
struct Rng {
    uint64_t state = 0;

    explicit Rng(uint64_t seed) : state(seed) {}

    uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // [0, 1) with 53 random bits
    double uniform() { return double(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n), n >= 1
    uint32_t below(uint32_t n) { return uint32_t(next() % n); }

    bool coin() { return (next() & 1u) != 0; }

    // Box-Muller from two fresh uniforms; no cached state so serialization
    // of `state` alone captures the full generator.
    double gauss() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Derive an independent stream from a base seed and a tag.
    static uint64_t mix(uint64_t seed, uint64_t tag) {
        Rng r(seed ^ (0x632be59bd9b4e019ull * (tag + 1)));
        return r.next();
    }
};

// Dense rank-4 feature map (batch, channel, row, col), row-major.
// Rank-2/3 data (label planes, single images) travels as degenerate shapes.
template <typename T>
struct TensorT {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<T> data;

    TensorT() = default;

    TensorT(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_) {
        require_arg(n_ >= 1 && c_ >= 1 && h_ >= 1 && w_ >= 1,
                    "tensor dims must be >= 1");
        data.assign(size_t(n_) * c_ * h_ * w_, T(0));
    }

    size_t size() const { return data.size(); }

    size_t idx(int i, int j, int y, int x) const {
        return ((size_t(i) * c + j) * h + y) * w + x;
    }

    T& at(int i, int j, int y, int x) { return data[idx(i, j, y, x)]; }
    T at(int i, int j, int y, int x) const { return data[idx(i, j, y, x)]; }

    std::array<int, 4> shape() const { return {n, c, h, w}; }

    bool same_shape(const TensorT& o) const {
        return n == o.n && c == o.c && h == o.h && w == o.w;
    }

    void fill(T v) { std::fill(data.begin(), data.end(), v); }
};

using Tensor = TensorT<float>;
using Tensor64 = TensorT<double>;

// 2-D cross-correlation weights, (out_ch, in_ch, kh, kw) row-major.
template <typename T>
struct ConvKernelT {
    int out_ch = 0, in_ch = 0, kh = 0, kw = 0;
    std::vector<T> w;
    bool has_bias = false;
    std::vector<T> bias;

    ConvKernelT() = default;

    ConvKernelT(int o, int i, int kh_, int kw_, bool with_bias = false)
        : out_ch(o), in_ch(i), kh(kh_), kw(kw_), has_bias(with_bias) {
        require_arg(o >= 1 && i >= 1 && kh_ >= 1 && kw_ >= 1,
                    "kernel dims must be >= 1");
        w.assign(size_t(o) * i * kh_ * kw_, T(0));
        if (with_bias) bias.assign(size_t(o), T(0));
    }

    size_t widx(int o, int i, int y, int x) const {
        return ((size_t(o) * in_ch + i) * kh + y) * kw + x;
    }

    T& wat(int o, int i, int y, int x) { return w[widx(o, i, y, x)]; }
    T wat(int o, int i, int y, int x) const { return w[widx(o, i, y, x)]; }

    size_t weight_count() const { return w.size() + bias.size(); }

    bool same_shape(const ConvKernelT& o) const {
        return out_ch == o.out_ch && in_ch == o.in_ch && kh == o.kh &&
               kw == o.kw && has_bias == o.has_bias;
    }
};

using ConvKernel = ConvKernelT<float>;

// Per-pixel integer class indices for a batch of label planes.
struct LabelMap {
    int n = 0, h = 0, w = 0;
    std::vector<int32_t> v;

    LabelMap() = default;
    LabelMap(int n_, int h_, int w_) : n(n_), h(h_), w(w_) {
        require_arg(n_ >= 1 && h_ >= 1 && w_ >= 1, "label dims must be >= 1");
        v.assign(size_t(n_) * h_ * w_, 0);
    }

    size_t idx(int i, int y, int x) const {
        return (size_t(i) * h + y) * w + x;
    }
    int32_t& at(int i, int y, int x) { return v[idx(i, y, x)]; }
    int32_t at(int i, int y, int x) const { return v[idx(i, y, x)]; }
};

template <typename T>
bool all_finite(const TensorT<T>& t) {
    for (T v : t.data)
        if (!std::isfinite(double(v))) return false;
    return true;
}

template <typename U, typename T>
TensorT<U> cast_tensor(const TensorT<T>& t) {
    TensorT<U> out(t.n, t.c, t.h, t.w);
    for (size_t i = 0; i < t.data.size(); ++i) out.data[i] = U(t.data[i]);
    return out;
}

template <typename U, typename T>
ConvKernelT<U> cast_kernel(const ConvKernelT<T>& k) {
    ConvKernelT<U> out(k.out_ch, k.in_ch, k.kh, k.kw, k.has_bias);
    for (size_t i = 0; i < k.w.size(); ++i) out.w[i] = U(k.w[i]);
    for (size_t i = 0; i < k.bias.size(); ++i) out.bias[i] = U(k.bias[i]);
    return out;
}

template <typename T>
void fill_uniform(std::vector<T>& v, Rng& rng, double lo, double hi) {
    for (T& x : v) x = T(rng.uniform(lo, hi));
}

template <typename T>
void fill_uniform(TensorT<T>& t, Rng& rng, double lo, double hi) {
    fill_uniform(t.data, rng, lo, hi);
}

template <typename T>
void fill_uniform(ConvKernelT<T>& k, Rng& rng, double lo, double hi) {
    fill_uniform(k.w, rng, lo, hi);
    if (k.has_bias) fill_uniform(k.bias, rng, lo, hi);
}

}  // namespace pppad
