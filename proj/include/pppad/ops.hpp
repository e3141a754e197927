#pragma once

// Dense tensor ops with reverse-mode adjoints. Every output element
// accumulates its terms in a fixed documented order, and parallel loops only
// split work across whole output elements or planes that a single thread
// owns, so results are bit-identical for any thread count.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "pppad/parallel.hpp"
#include "pppad/tensor.hpp"

namespace pppad {

template <typename T>
struct ConvGradsT {
    TensorT<T> input;       // dL/dinput
    ConvKernelT<T> kernel;  // dL/dweights, dL/dbias in .bias when present
};

template <typename T>
TensorT<T> conv2d_valid(const TensorT<T>& in, const ConvKernelT<T>& k,
                        int stride = 1) {
    require_arg(stride >= 1, "conv2d_valid: stride must be >= 1");
    require_dim(in.c == k.in_ch, "conv2d_valid: input channels != kernel in_ch");
    require_dim(in.h >= k.kh && in.w >= k.kw,
                "conv2d_valid: kernel larger than input");

    const int oh = (in.h - k.kh) / stride + 1;
    const int ow = (in.w - k.kw) / stride + 1;
    TensorT<T> out(in.n, k.out_ch, oh, ow);
    const size_t work = out.size() * size_t(k.in_ch) * k.kh * k.kw;
    const size_t plane = size_t(oh) * ow;

    // Sweeps one kernel tap at a time over the whole (b, o) output plane.
    // Every output element still receives its terms in (ci, ky, kx) order with
    // one rounding each, then the bias, so the result is bit-identical to a
    // per-element dot product while the inner loop stays vectorizable.
#pragma omp parallel for collapse(2) schedule(static) \
    if (parallel::enabled() && work >= parallel::kGrain)
    for (int b = 0; b < in.n; ++b) {
        for (int o = 0; o < k.out_ch; ++o) {
            T* obase = out.data.data() + out.idx(b, o, 0, 0);
            for (int ci = 0; ci < k.in_ch; ++ci) {
                for (int ky = 0; ky < k.kh; ++ky) {
                    for (int kx = 0; kx < k.kw; ++kx) {
                        const T wv = k.wat(o, ci, ky, kx);
                        for (int oy = 0; oy < oh; ++oy) {
                            const T* irow = in.data.data() +
                                            in.idx(b, ci, oy * stride + ky, kx);
                            T* orow = obase + size_t(oy) * ow;
                            if (stride == 1) {
                                for (int ox = 0; ox < ow; ++ox)
                                    orow[ox] += wv * irow[ox];
                            } else {
                                for (int ox = 0; ox < ow; ++ox)
                                    orow[ox] += wv * irow[size_t(ox) * stride];
                            }
                        }
                    }
                }
            }
            if (k.has_bias) {
                const T bias = k.bias[o];
                for (size_t i = 0; i < plane; ++i) obase[i] += bias;
            }
        }
    }
    return out;
}

template <typename T>
ConvGradsT<T> conv2d_backward(const TensorT<T>& grad_out, const TensorT<T>& in,
                              const ConvKernelT<T>& k, int stride = 1) {
    require_arg(stride >= 1, "conv2d_backward: stride must be >= 1");
    require_dim(in.c == k.in_ch, "conv2d_backward: input channels != kernel in_ch");
    const int oh = (in.h - k.kh) / stride + 1;
    const int ow = (in.w - k.kw) / stride + 1;
    require_dim(grad_out.n == in.n && grad_out.c == k.out_ch &&
                    grad_out.h == oh && grad_out.w == ow,
                "conv2d_backward: grad_out shape mismatch");

    ConvGradsT<T> g{TensorT<T>(in.n, in.c, in.h, in.w),
                    ConvKernelT<T>(k.out_ch, k.in_ch, k.kh, k.kw, k.has_bias)};

    // grad_input. Each (b, ci) plane is owned by one thread and accumulates
    // kernel taps in (o, ky, kx) order, which per input element matches the
    // gather loop below bit for bit.
    const size_t work_in = g.input.size() * size_t(k.out_ch) * k.kh * k.kw;
    if (stride == 1) {
#pragma omp parallel for collapse(2) schedule(static) \
    if (parallel::enabled() && work_in >= parallel::kGrain)
        for (int b = 0; b < in.n; ++b) {
            for (int ci = 0; ci < in.c; ++ci) {
                T* plane = g.input.data.data() + g.input.idx(b, ci, 0, 0);
                for (int o = 0; o < k.out_ch; ++o) {
                    for (int ky = 0; ky < k.kh; ++ky) {
                        for (int kx = 0; kx < k.kw; ++kx) {
                            const T wv = k.wat(o, ci, ky, kx);
                            for (int oy = 0; oy < oh; ++oy) {
                                const T* grow = grad_out.data.data() +
                                                grad_out.idx(b, o, oy, 0);
                                T* girow = plane + size_t(oy + ky) * in.w + kx;
                                for (int ox = 0; ox < ow; ++ox)
                                    girow[ox] += wv * grow[ox];
                            }
                        }
                    }
                }
            }
        }
    } else {
#pragma omp parallel for collapse(2) schedule(static) \
    if (parallel::enabled() && work_in >= parallel::kGrain)
        for (int b = 0; b < in.n; ++b) {
            for (int ci = 0; ci < in.c; ++ci) {
                for (int iy = 0; iy < in.h; ++iy) {
                    for (int ix = 0; ix < in.w; ++ix) {
                        T acc = 0;
                        for (int o = 0; o < k.out_ch; ++o)
                            for (int ky = 0; ky < k.kh; ++ky) {
                                const int ty = iy - ky;
                                if (ty < 0 || ty % stride != 0) continue;
                                const int oy = ty / stride;
                                if (oy >= oh) continue;
                                for (int kx = 0; kx < k.kw; ++kx) {
                                    const int tx = ix - kx;
                                    if (tx < 0 || tx % stride != 0) continue;
                                    const int ox = tx / stride;
                                    if (ox >= ow) continue;
                                    acc += grad_out.at(b, o, oy, ox) *
                                           k.wat(o, ci, ky, kx);
                                }
                            }
                        g.input.at(b, ci, iy, ix) = acc;
                    }
                }
            }
        }
    }

    // grad_kernel: per (o, ci) pair all kh*kw taps accumulate side by side in
    // one sweep over (b, oy, ox), so each weight sees the same serial term
    // order as a per-weight gather but the grad_out load is shared and the
    // tap updates run as independent dependency chains.
    const size_t work_k = k.w.size() * size_t(in.n) * oh * ow;
#pragma omp parallel for collapse(2) schedule(static) \
    if (parallel::enabled() && work_k >= parallel::kGrain)
    for (int o = 0; o < k.out_ch; ++o) {
        for (int ci = 0; ci < k.in_ch; ++ci) {
            const int taps = k.kh * k.kw;
            std::vector<T> acc(size_t(taps), T(0));
            for (int b = 0; b < in.n; ++b) {
                const T* ibase = in.data.data() + in.idx(b, ci, 0, 0);
                for (int oy = 0; oy < oh; ++oy) {
                    const T* grow = grad_out.data.data() +
                                    grad_out.idx(b, o, oy, 0);
                    const T* iwin = ibase + size_t(oy) * stride * in.w;
                    for (int ox = 0; ox < ow; ++ox) {
                        const T gv = grow[ox];
                        const T* ipix = iwin + size_t(ox) * stride;
                        int t = 0;
                        for (int ky = 0; ky < k.kh; ++ky) {
                            const T* irow = ipix + size_t(ky) * in.w;
                            for (int kx = 0; kx < k.kw; ++kx, ++t)
                                acc[t] += gv * irow[kx];
                        }
                    }
                }
            }
            int t = 0;
            for (int ky = 0; ky < k.kh; ++ky)
                for (int kx = 0; kx < k.kw; ++kx, ++t)
                    g.kernel.wat(o, ci, ky, kx) = acc[t];
        }
    }

    if (k.has_bias) {
        for (int o = 0; o < k.out_ch; ++o) {
            T acc = 0;
            for (int b = 0; b < in.n; ++b)
                for (int oy = 0; oy < oh; ++oy)
                    for (int ox = 0; ox < ow; ++ox)
                        acc += grad_out.at(b, o, oy, ox);
            g.kernel.bias[o] = acc;
        }
    }
    return g;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& in) {
    TensorT<T> out(in.n, in.c, in.h, in.w);
    const size_t total = in.size();
#pragma omp parallel for schedule(static) \
    if (parallel::enabled() && total >= parallel::kGrain)
    for (size_t i = 0; i < total; ++i)
        out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
    return out;
}

// Subgradient at 0 is 0: grad passes only where the pre-activation was > 0.
template <typename T>
TensorT<T> relu_backward(const TensorT<T>& grad_out, const TensorT<T>& pre) {
    require_dim(grad_out.same_shape(pre), "relu_backward: shape mismatch");
    TensorT<T> g(pre.n, pre.c, pre.h, pre.w);
    const size_t total = pre.size();
#pragma omp parallel for schedule(static) \
    if (parallel::enabled() && total >= parallel::kGrain)
    for (size_t i = 0; i < total; ++i)
        g.data[i] = pre.data[i] > T(0) ? grad_out.data[i] : T(0);
    return g;
}

template <typename T>
struct XentResultT {
    T loss = 0;
    TensorT<T> grad;  // dL/dlogits
};

// Mean over counted pixels of -ln softmax(logits)[label]. Pixels whose label
// equals ignore_index are skipped in both the mean and the gradient.
template <typename T>
XentResultT<T> softmax_cross_entropy(const TensorT<T>& logits,
                                     const LabelMap& labels,
                                     int ignore_index = -1) {
    require_dim(logits.n == labels.n && logits.h == labels.h &&
                    logits.w == labels.w,
                "softmax_cross_entropy: logits/labels shape mismatch");
    const int K = logits.c;
    for (int32_t lab : labels.v)
        require_arg(lab == ignore_index || (lab >= 0 && lab < K),
                    "softmax_cross_entropy: label out of range");

    XentResultT<T> res;
    res.grad = TensorT<T>(logits.n, K, logits.h, logits.w);

    const size_t pixels = labels.v.size();
    std::vector<T> per_pixel(pixels, T(0));
    long long counted = 0;
    for (int32_t lab : labels.v)
        if (lab != ignore_index) ++counted;
    if (counted == 0) return res;
    const T inv_count = T(1) / T(counted);

#pragma omp parallel for collapse(2) schedule(static) \
    if (parallel::enabled() && pixels * K >= parallel::kGrain)
    for (int b = 0; b < logits.n; ++b) {
        for (int y = 0; y < logits.h; ++y) {
            for (int x = 0; x < logits.w; ++x) {
                const int32_t lab = labels.at(b, y, x);
                if (lab == ignore_index) {
                    for (int kk = 0; kk < K; ++kk)
                        res.grad.at(b, kk, y, x) = T(0);
                    continue;
                }
                T mx = logits.at(b, 0, y, x);
                for (int kk = 1; kk < K; ++kk)
                    mx = std::max(mx, logits.at(b, kk, y, x));
                T sum = 0;
                for (int kk = 0; kk < K; ++kk)
                    sum += std::exp(logits.at(b, kk, y, x) - mx);
                for (int kk = 0; kk < K; ++kk) {
                    const T p = std::exp(logits.at(b, kk, y, x) - mx) / sum;
                    res.grad.at(b, kk, y, x) =
                        (p - (kk == lab ? T(1) : T(0))) * inv_count;
                }
                per_pixel[labels.idx(b, y, x)] =
                    std::log(sum) - (logits.at(b, lab, y, x) - mx);
            }
        }
    }

    // fixed-order reduction keeps the loss bit-stable across thread counts
    T total = 0;
    for (T v : per_pixel) total += v;
    res.loss = total * inv_count;
    return res;
}

// v <- momentum*v + grad + weight_decay*param;  param <- param - lr*v
template <typename T>
void sgd_step(std::span<T> param, std::span<const T> grad,
              std::span<T> velocity, T lr, T momentum, T weight_decay) {
    require_dim(param.size() == grad.size() && param.size() == velocity.size(),
                "sgd_step: size mismatch");
    for (size_t i = 0; i < param.size(); ++i) {
        velocity[i] = momentum * velocity[i] + grad[i] + weight_decay * param[i];
        param[i] -= lr * velocity[i];
    }
}

inline std::array<int, 4> inverse_perm(const std::array<int, 4>& perm) {
    std::array<int, 4> inv{};
    for (int i = 0; i < 4; ++i) inv[perm[i]] = i;
    return inv;
}

// numpy-style transpose: out.shape[i] = in.shape[perm[i]],
// out[j0..j3] = in[jp] with jp[perm[i]] = j_i. Pure copy.
template <typename T>
TensorT<T> permute_axes(const TensorT<T>& in, const std::array<int, 4>& perm) {
    std::array<bool, 4> seen{};
    for (int p : perm) {
        require_arg(p >= 0 && p < 4, "permute_axes: axis out of range");
        require_arg(!seen[p], "permute_axes: repeated axis");
        seen[p] = true;
    }
    const std::array<int, 4> ish = {in.n, in.c, in.h, in.w};
    TensorT<T> out(ish[perm[0]], ish[perm[1]], ish[perm[2]], ish[perm[3]]);
    const std::array<int, 4> osh = out.shape();

    const size_t total = in.size();
#pragma omp parallel for schedule(static) \
    if (parallel::enabled() && total >= parallel::kGrain)
    for (size_t oi = 0; oi < total; ++oi) {
        size_t rem = oi;
        std::array<int, 4> oidx{};
        for (int a = 3; a >= 0; --a) {
            oidx[a] = int(rem % osh[a]);
            rem /= osh[a];
        }
        std::array<int, 4> iidx{};
        for (int a = 0; a < 4; ++a) iidx[perm[a]] = oidx[a];
        out.data[oi] = in.at(iidx[0], iidx[1], iidx[2], iidx[3]);
    }
    return out;
}

}  // namespace pppad
