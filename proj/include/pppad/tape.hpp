#pragma once

// Minimal reverse-mode autodiff over the ops in this library. Forward runs
// eagerly while recording; backward walks the record in reverse, so every
// node's adjoint executes exactly once per call. replay() re-runs the
// recorded program against the current leaf/parameter values, which is what
// finite-difference checks perturb.

#include <array>
#include <memory>
#include <vector>

#include "pppad/ops.hpp"
#include "pppad/padding.hpp"
#include "pppad/pp_pad.hpp"
#include "pppad/tensor.hpp"

namespace pppad {

// Learnable convolution with its gradient and momentum buffers.
template <typename T>
struct ConvParamT {
    ConvKernelT<T> kernel, grad, velocity;

    static ConvParamT make(int o, int i, int kh, int kw, bool with_bias) {
        ConvParamT p;
        p.kernel = ConvKernelT<T>(o, i, kh, kw, with_bias);
        p.grad = ConvKernelT<T>(o, i, kh, kw, with_bias);
        p.velocity = ConvKernelT<T>(o, i, kh, kw, with_bias);
        return p;
    }

    void zero_grad() {
        std::fill(grad.w.begin(), grad.w.end(), T(0));
        std::fill(grad.bias.begin(), grad.bias.end(), T(0));
    }

    void step(T lr, T momentum, T weight_decay) {
        sgd_step<T>(kernel.w, std::span<const T>(grad.w), velocity.w, lr,
                    momentum, weight_decay);
        if (kernel.has_bias)
            sgd_step<T>(kernel.bias, std::span<const T>(grad.bias),
                        velocity.bias, lr, momentum, weight_decay);
    }

    size_t weight_count() const { return kernel.weight_count(); }
};

template <typename T>
std::array<ConvKernelT<T>*, 12> layer_kernels(PPPadLayerT<T>& l) {
    std::array<ConvKernelT<T>*, 12> out{};
    size_t i = 0;
    l.for_each_kernel([&](ConvKernelT<T>& k) { out[i++] = &k; });
    return out;
}

// Learnable padding layer with gradient and momentum buffers.
template <typename T>
struct PPPadParamT {
    PPPadConfig cfg;
    PPPadLayerT<T> layer, grad, velocity;

    static PPPadParamT make(const PPPadConfig& cfg) {
        PPPadParamT p;
        p.cfg = cfg;
        p.layer = PPPadLayerT<T>::make(cfg);
        p.grad = PPPadLayerT<T>::make(cfg);
        p.velocity = PPPadLayerT<T>::make(cfg);
        return p;
    }

    void zero_grad() {
        grad.for_each_kernel([](ConvKernelT<T>& k) {
            std::fill(k.w.begin(), k.w.end(), T(0));
        });
    }

    void step(T lr, T momentum, T weight_decay) {
        auto pk = layer_kernels(layer);
        auto gk = layer_kernels(grad);
        auto vk = layer_kernels(velocity);
        for (size_t i = 0; i < pk.size(); ++i)
            sgd_step<T>(pk[i]->w, std::span<const T>(gk[i]->w), vk[i]->w, lr,
                        momentum, weight_decay);
    }

    size_t weight_count() const { return layer.weight_count(); }
};

using ConvParam = ConvParamT<float>;
using PPPadParam = PPPadParamT<float>;

template <typename T>
void accumulate_kernel(ConvKernelT<T>& dst, const ConvKernelT<T>& src) {
    require_dim(dst.same_shape(src), "accumulate_kernel: shape mismatch");
    for (size_t i = 0; i < dst.w.size(); ++i) dst.w[i] += src.w[i];
    for (size_t i = 0; i < dst.bias.size(); ++i) dst.bias[i] += src.bias[i];
}

template <typename T>
class GradTapeT {
public:
    using Var = int;

    Var leaf(TensorT<T> v) {
        Node nd;
        nd.kind = Kind::Leaf;
        nd.value = std::move(v);
        return push(std::move(nd));
    }

    Var conv2d(Var in, ConvParamT<T>* param, int stride = 1) {
        Node nd;
        nd.kind = Kind::Conv;
        nd.in0 = check(in);
        nd.conv = param;
        nd.stride = stride;
        nd.value = conv2d_valid(value(in), param->kernel, stride);
        return push(std::move(nd));
    }

    Var partial_conv2d(Var in, ConvParamT<T>* param, int p) {
        Node nd;
        nd.kind = Kind::PartialConv;
        nd.in0 = check(in);
        nd.conv = param;
        nd.pad_width = p;
        nd.value = pppad::partial_conv2d(value(in), param->kernel, p);
        return push(std::move(nd));
    }

    Var pad(Var in, PadMode mode, int p) {
        Node nd;
        nd.kind = Kind::Pad;
        nd.in0 = check(in);
        nd.mode = mode;
        nd.pad_width = p;
        nd.value = pppad::pad(value(in), mode, p);
        return push(std::move(nd));
    }

    Var pp_pad(Var in, PPPadParamT<T>* param) {
        Node nd;
        nd.kind = Kind::PPPad;
        nd.in0 = check(in);
        nd.pp = param;
        nd.value = pppad::pp_pad(value(in), param->layer, param->cfg);
        return push(std::move(nd));
    }

    Var relu(Var in) {
        Node nd;
        nd.kind = Kind::Relu;
        nd.in0 = check(in);
        nd.value = pppad::relu(value(in));
        return push(std::move(nd));
    }

    Var permute(Var in, const std::array<int, 4>& perm) {
        Node nd;
        nd.kind = Kind::Permute;
        nd.in0 = check(in);
        nd.perm = perm;
        nd.value = permute_axes(value(in), perm);
        return push(std::move(nd));
    }

    const TensorT<T>& value(Var v) const { return nodes_[size_t(check(v))].value; }

    // Overwrite a leaf in place (shape must match); replay() then propagates.
    void set_leaf(Var v, const TensorT<T>& nv) {
        TensorT<T>& cur = mutable_leaf(v);
        require_dim(cur.same_shape(nv), "set_leaf: shape mismatch");
        cur = nv;
    }

    // Direct access to a leaf's storage, for in-place perturbation before
    // replay(). Element pointers stay valid for the tape's lifetime.
    TensorT<T>& mutable_leaf(Var v) {
        Node& nd = nodes_[size_t(check(v))];
        require_arg(nd.kind == Kind::Leaf, "mutable_leaf: not a leaf");
        return nd.value;
    }

    // Re-execute the recorded program with current leaves and parameters.
    void replay() {
        for (Node& nd : nodes_) {
            switch (nd.kind) {
                case Kind::Leaf: break;
                case Kind::Conv:
                    nd.value = conv2d_valid(nodes_[size_t(nd.in0)].value,
                                            nd.conv->kernel, nd.stride);
                    break;
                case Kind::PartialConv:
                    nd.value = pppad::partial_conv2d(nodes_[size_t(nd.in0)].value,
                                                     nd.conv->kernel, nd.pad_width);
                    break;
                case Kind::Pad:
                    nd.value = pppad::pad(nodes_[size_t(nd.in0)].value, nd.mode,
                                          nd.pad_width);
                    break;
                case Kind::PPPad:
                    nd.value = pppad::pp_pad(nodes_[size_t(nd.in0)].value,
                                             nd.pp->layer, nd.pp->cfg);
                    break;
                case Kind::Relu:
                    nd.value = pppad::relu(nodes_[size_t(nd.in0)].value);
                    break;
                case Kind::Permute:
                    nd.value = permute_axes(nodes_[size_t(nd.in0)].value, nd.perm);
                    break;
            }
        }
    }

    // Seed the root with dL/droot and run adjoints in reverse record order.
    // Parameter gradients accumulate (callers zero them between steps); leaf
    // gradients are readable through grad() until the next backward().
    void backward(Var root, const TensorT<T>& seed) {
        const int r = check(root);
        require_dim(seed.same_shape(nodes_[size_t(r)].value),
                    "backward: seed shape mismatch");
        grads_.assign(nodes_.size(), TensorT<T>());
        grads_[size_t(r)] = seed;

        for (int i = r; i >= 0; --i) {
            if (grads_[size_t(i)].data.empty()) continue;
            const Node& nd = nodes_[size_t(i)];
            const TensorT<T>& go = grads_[size_t(i)];
            switch (nd.kind) {
                case Kind::Leaf: break;
                case Kind::Conv: {
                    ConvGradsT<T> g = conv2d_backward(
                        go, nodes_[size_t(nd.in0)].value, nd.conv->kernel, nd.stride);
                    accumulate_kernel(nd.conv->grad, g.kernel);
                    add_to(nd.in0, std::move(g.input));
                    break;
                }
                case Kind::PartialConv: {
                    ConvGradsT<T> g = partial_conv2d_backward(
                        go, nodes_[size_t(nd.in0)].value, nd.conv->kernel, nd.pad_width);
                    accumulate_kernel(nd.conv->grad, g.kernel);
                    add_to(nd.in0, std::move(g.input));
                    break;
                }
                case Kind::Pad: {
                    const TensorT<T>& src = nodes_[size_t(nd.in0)].value;
                    add_to(nd.in0, pad_backward(go, nd.mode, nd.pad_width, src.h, src.w));
                    break;
                }
                case Kind::PPPad: {
                    PPPadGradsT<T> g = pp_pad_backward(
                        go, nodes_[size_t(nd.in0)].value, nd.pp->layer, nd.pp->cfg);
                    auto gk = layer_kernels(nd.pp->grad);
                    auto sk = layer_kernels(g.layer);
                    for (size_t j = 0; j < gk.size(); ++j)
                        accumulate_kernel(*gk[j], *sk[j]);
                    add_to(nd.in0, std::move(g.fm));
                    break;
                }
                case Kind::Relu:
                    add_to(nd.in0, relu_backward(go, nodes_[size_t(nd.in0)].value));
                    break;
                case Kind::Permute:
                    add_to(nd.in0, permute_axes(go, inverse_perm(nd.perm)));
                    break;
            }
        }
    }

    // Gradient w.r.t. a node's value from the most recent backward().
    // Empty tensor when no gradient reached it.
    const TensorT<T>& grad(Var v) const {
        static const TensorT<T> empty;
        const size_t i = size_t(check(v));
        return i < grads_.size() ? grads_[i] : empty;
    }

    size_t node_count() const { return nodes_.size(); }

private:
    enum class Kind { Leaf, Conv, PartialConv, Pad, PPPad, Relu, Permute };

    struct Node {
        Kind kind = Kind::Leaf;
        int in0 = -1;
        ConvParamT<T>* conv = nullptr;
        PPPadParamT<T>* pp = nullptr;
        int stride = 1;
        int pad_width = 0;
        PadMode mode = PadMode::Zero;
        std::array<int, 4> perm = {0, 1, 2, 3};
        TensorT<T> value;
    };

    int check(Var v) const {
        require_arg(v >= 0 && size_t(v) < nodes_.size(), "tape: bad var handle");
        return v;
    }

    Var push(Node nd) {
        nodes_.push_back(std::move(nd));
        return Var(nodes_.size() - 1);
    }

    void add_to(int var, TensorT<T> g) {
        TensorT<T>& dst = grads_[size_t(var)];
        if (dst.data.empty()) {
            dst = std::move(g);
            return;
        }
        require_dim(dst.same_shape(g), "tape: gradient shape mismatch");
        for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += g.data[i];
    }

    std::vector<Node> nodes_;
    std::vector<TensorT<T>> grads_;
};

using GradTape = GradTapeT<float>;
using GradTape64 = GradTapeT<double>;

}  // namespace pppad
