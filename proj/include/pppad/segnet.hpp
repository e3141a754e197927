#pragma once

// Small fully-convolutional segmentation net: 3x3 convs at constant spatial
// size, each preceded by a pluggable pad-1 stage, ReLU between layers, no
// activation on the classifier. Depth = widths.size() + 1.

#include <string>
#include <vector>

#include "pppad/tape.hpp"

namespace pppad {

template <typename T>
struct NamedParamT {
    std::string name;
    std::vector<T>* values = nullptr;
    std::vector<T>* velocity = nullptr;
    std::array<int, 4> shape = {0, 0, 0, 0};
};

template <typename T>
struct SegNetT {
    int in_channels = 3;
    int classes = 2;
    std::vector<int> widths;
    PadMode mode = PadMode::Zero;
    PPPadConfig pp_cfg;

    std::vector<ConvParamT<T>> convs;
    std::vector<PPPadParamT<T>> pads;  // one per conv layer, PPPad mode only

    static SegNetT make(int in_ch, std::vector<int> widths, int K, PadMode mode,
                        const PPPadConfig& pp_cfg, Rng& rng,
                        double pp_init_scale = 0.5) {
        require_arg(K >= 2, "segnet: need at least 2 classes");
        require_arg(!widths.empty(), "segnet: need at least one hidden layer");
        SegNetT net;
        net.in_channels = in_ch;
        net.classes = K;
        net.widths = std::move(widths);
        net.pp_cfg = pp_cfg;

        for (int i = 0; i < net.layer_count(); ++i) {
            const int ci = i == 0 ? in_ch : net.widths[size_t(i - 1)];
            const int co = i + 1 == net.layer_count() ? K : net.widths[size_t(i)];
            auto p = ConvParamT<T>::make(co, ci, 3, 3, true);
            const double std_dev = std::sqrt(2.0 / (double(ci) * 9.0));
            for (T& v : p.kernel.w) v = T(std_dev * rng.gauss());
            net.convs.push_back(std::move(p));
        }
        net.set_mode(mode, rng, pp_init_scale);
        return net;
    }

    int layer_count() const { return int(widths.size()) + 1; }

    // Swapping to learnable padding attaches freshly initialized predictors;
    // conv weights carry over untouched.
    void set_mode(PadMode new_mode, Rng& rng, double pp_init_scale = 0.5) {
        mode = new_mode;
        pads.clear();
        if (mode != PadMode::PPPad) return;
        for (int i = 0; i < layer_count(); ++i) {
            auto p = PPPadParamT<T>::make(pp_cfg);
            p.layer.init_uniform(rng, T(pp_init_scale));
            pads.push_back(std::move(p));
        }
    }

    typename GradTapeT<T>::Var forward(GradTapeT<T>& tape,
                                       typename GradTapeT<T>::Var input) {
        auto x = input;
        for (int i = 0; i < layer_count(); ++i) {
            switch (mode) {
                case PadMode::Partial:
                    x = tape.partial_conv2d(x, &convs[size_t(i)], 1);
                    break;
                case PadMode::PPPad:
                    x = tape.pp_pad(x, &pads[size_t(i)]);
                    x = tape.conv2d(x, &convs[size_t(i)], 1);
                    break;
                default:
                    x = tape.pad(x, mode, 1);
                    x = tape.conv2d(x, &convs[size_t(i)], 1);
                    break;
            }
            if (i + 1 < layer_count()) x = tape.relu(x);
        }
        return x;
    }

    // Tape-free forward for evaluation.
    TensorT<T> infer(const TensorT<T>& batch) const {
        TensorT<T> x = batch;
        for (int i = 0; i < layer_count(); ++i) {
            const ConvKernelT<T>& k = convs[size_t(i)].kernel;
            switch (mode) {
                case PadMode::Partial:
                    x = partial_conv2d(x, k, 1);
                    break;
                case PadMode::PPPad:
                    x = conv2d_valid(pp_pad(x, pads[size_t(i)].layer, pp_cfg), k, 1);
                    break;
                default:
                    x = conv2d_valid(pad(x, mode, 1), k, 1);
                    break;
            }
            if (i + 1 < layer_count()) x = relu(x);
        }
        return x;
    }

    // Argmax per pixel; ties resolve to the lowest class index.
    LabelMap predict(const TensorT<T>& batch) const {
        const TensorT<T> logits = infer(batch);
        LabelMap out(logits.n, logits.h, logits.w);
        for (int b = 0; b < logits.n; ++b)
            for (int y = 0; y < logits.h; ++y)
                for (int x = 0; x < logits.w; ++x) {
                    int best = 0;
                    T bv = logits.at(b, 0, y, x);
                    for (int k = 1; k < logits.c; ++k) {
                        const T v = logits.at(b, k, y, x);
                        if (v > bv) {
                            bv = v;
                            best = k;
                        }
                    }
                    out.at(b, y, x) = best;
                }
        return out;
    }

    void zero_grad() {
        for (auto& c : convs) c.zero_grad();
        for (auto& p : pads) p.zero_grad();
    }

    void step(T lr, T momentum, T weight_decay) {
        for (auto& c : convs) c.step(lr, momentum, weight_decay);
        for (auto& p : pads) p.step(lr, momentum, weight_decay);
    }

    size_t param_count() const {
        size_t n = 0;
        for (const auto& c : convs) n += c.weight_count();
        for (const auto& p : pads) n += p.weight_count();
        return n;
    }

    // Fixed serialization order: conv weights/biases by layer, then per
    // learnable pad layer (top, bottom, left, right) x (w1, w2, w3).
    std::vector<NamedParamT<T>> named_params() {
        std::vector<NamedParamT<T>> out;
        for (size_t i = 0; i < convs.size(); ++i) {
            auto& c = convs[i];
            const std::string base = "conv" + std::to_string(i);
            out.push_back({base + ".weight", &c.kernel.w, &c.velocity.w,
                           {c.kernel.out_ch, c.kernel.in_ch, c.kernel.kh, c.kernel.kw}});
            out.push_back({base + ".bias", &c.kernel.bias, &c.velocity.bias,
                           {c.kernel.out_ch, 1, 1, 1}});
        }
        for (size_t i = 0; i < pads.size(); ++i) {
            auto pk = layer_kernels(pads[i].layer);
            auto vk = layer_kernels(pads[i].velocity);
            static const char* stage[3] = {"w1", "w2", "w3"};
            size_t j = 0;
            for (Edge e : kEdges)
                for (int s = 0; s < 3; ++s, ++j) {
                    ConvKernelT<T>& k = *pk[j];
                    out.push_back({"pad" + std::to_string(i) + "." + edge_name(e) +
                                       "." + stage[s],
                                   &k.w, &vk[j]->w,
                                   {k.out_ch, k.in_ch, k.kh, k.kw}});
                }
        }
        return out;
    }
};

using SegNet = SegNetT<float>;

}  // namespace pppad
