#include "pppad/gradcheck.hpp"

#include <algorithm>

#include "pppad/ops.hpp"
#include "pppad/padding.hpp"
#include "pppad/pp_pad.hpp"
#include "pppad/tape.hpp"

namespace pppad {
namespace {

using Tape = GradTapeT<double>;

// Values bounded away from zero so ReLU is locally linear around every
// finite-difference perturbation.
void fill_away_from_zero(std::vector<double>& v, Rng& rng, double lo, double hi) {
    for (double& x : v) {
        const double mag = rng.uniform(lo, hi);
        x = rng.coin() ? mag : -mag;
    }
}

double dot(const Tensor64& a, const Tensor64& b) {
    double s = 0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

void append_slots(std::vector<CheckSlot>& slots, std::vector<double>& values,
                  const std::vector<double>& analytic) {
    for (size_t i = 0; i < values.size(); ++i)
        slots.push_back({&values[i], analytic[i]});
}

// Smallest nonzero |pre-activation| seen anywhere a ReLU is applied;
// instances where this is tiny are resampled rather than checked across a
// kink. Exact zeros only arise structurally (a whole dead input region) and
// stay exactly zero under eps-perturbation, so they are safe to keep.
double min_abs_nonzero(const Tensor64& t) {
    double m = 1e300;
    for (double v : t.data)
        if (v != 0.0) m = std::min(m, std::abs(v));
    return m;
}

double min_pre_relu(const PPPadLayerT<double>& layer, const PPPadConfig& cfg,
                    const Tensor64& fm) {
    double m = 1e300;
    for (Edge e : kEdges) {
        EdgeCacheT<double> cache;
        predict_edge(fm, e, layer.edge(e), cfg, &cache);
        m = std::min({m, min_abs_nonzero(cache.pre1), min_abs_nonzero(cache.pre2),
                      min_abs_nonzero(cache.pre3)});
    }
    return m;
}

constexpr double kKinkMargin = 3e-4;

double check_conv2d(Rng& rng) {
    const int b = 1 + int(rng.below(2)), ci = 1 + int(rng.below(3));
    const int co = 1 + int(rng.below(3));
    const int stride = 1 + int(rng.below(2));
    const int kh = 1 + 2 * int(rng.below(2)), kw = 1 + 2 * int(rng.below(2));
    const int h = kh + stride * (1 + int(rng.below(3)));
    const int w = kw + stride * (1 + int(rng.below(3)));
    const bool bias = rng.coin();

    auto param = ConvParamT<double>::make(co, ci, kh, kw, bias);
    fill_uniform(param.kernel, rng, -1.0, 1.0);
    Tensor64 x(b, ci, h, w);
    fill_uniform(x, rng, -1.0, 1.0);

    Tape tape;
    auto vin = tape.leaf(std::move(x));
    auto vout = tape.conv2d(vin, &param, stride);

    Tensor64 r(tape.value(vout).n, tape.value(vout).c, tape.value(vout).h,
               tape.value(vout).w);
    fill_uniform(r, rng, -1.0, 1.0);
    tape.backward(vout, r);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, tape.grad(vin).data);
    append_slots(slots, param.kernel.w, param.grad.w);
    if (bias) append_slots(slots, param.kernel.bias, param.grad.bias);

    auto objective = [&] {
        tape.replay();
        return dot(tape.value(vout), r);
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

double check_relu(Rng& rng) {
    const int b = 1 + int(rng.below(2)), c = 1 + int(rng.below(4));
    const int h = 2 + int(rng.below(6)), w = 2 + int(rng.below(6));
    Tensor64 x(b, c, h, w);
    fill_away_from_zero(x.data, rng, 0.05, 1.0);

    Tape tape;
    auto vin = tape.leaf(std::move(x));
    auto vout = tape.relu(vin);
    Tensor64 r(b, c, h, w);
    fill_uniform(r, rng, -1.0, 1.0);
    tape.backward(vout, r);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, tape.grad(vin).data);
    auto objective = [&] {
        tape.replay();
        return dot(tape.value(vout), r);
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

double check_softmax_xent(Rng& rng) {
    const int b = 1 + int(rng.below(2)), K = 2 + int(rng.below(4));
    const int h = 2 + int(rng.below(4)), w = 2 + int(rng.below(4));
    const bool with_ignored = rng.coin();

    Tensor64 logits(b, K, h, w);
    fill_uniform(logits, rng, -2.0, 2.0);
    LabelMap labels(b, h, w);
    for (int32_t& lab : labels.v) {
        lab = int32_t(rng.below(uint32_t(K)));
        if (with_ignored && rng.below(5) == 0) lab = -1;
    }
    bool any = false;
    for (int32_t lab : labels.v) any = any || lab >= 0;
    if (!any) labels.v[0] = 0;

    Tape tape;
    auto vin = tape.leaf(std::move(logits));
    auto res = softmax_cross_entropy(tape.value(vin), labels, -1);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, res.grad.data);
    auto objective = [&] {
        return softmax_cross_entropy(tape.value(vin), labels, -1).loss;
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

double check_pad(Rng& rng, PadMode mode) {
    const int b = 1 + int(rng.below(2)), c = 1 + int(rng.below(3));
    const int h = 3 + int(rng.below(4)), w = 3 + int(rng.below(4));
    const int pmax = mode == PadMode::Reflect ? std::min(h, w) - 1 : 3;
    const int p = 1 + int(rng.below(uint32_t(std::min(pmax, 3))));

    Tensor64 x(b, c, h, w);
    fill_uniform(x, rng, -1.0, 1.0);
    Tape tape;
    auto vin = tape.leaf(std::move(x));
    auto vout = tape.pad(vin, mode, p);
    Tensor64 r(b, c, h + 2 * p, w + 2 * p);
    fill_uniform(r, rng, -1.0, 1.0);
    tape.backward(vout, r);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, tape.grad(vin).data);
    auto objective = [&] {
        tape.replay();
        return dot(tape.value(vout), r);
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

double check_partial_conv(Rng& rng) {
    const int b = 1 + int(rng.below(2)), ci = 1 + int(rng.below(3));
    const int co = 1 + int(rng.below(3));
    const int k = rng.coin() ? 3 : 5;
    const int p = 1 + int(rng.below(2));
    const int h = k + int(rng.below(4)), w = k + int(rng.below(4));
    const bool bias = rng.coin();

    auto param = ConvParamT<double>::make(co, ci, k, k, bias);
    fill_uniform(param.kernel, rng, -1.0, 1.0);
    Tensor64 x(b, ci, h, w);
    fill_uniform(x, rng, -1.0, 1.0);

    Tape tape;
    auto vin = tape.leaf(std::move(x));
    auto vout = tape.partial_conv2d(vin, &param, p);
    const auto& ov = tape.value(vout);
    Tensor64 r(ov.n, ov.c, ov.h, ov.w);
    fill_uniform(r, rng, -1.0, 1.0);
    tape.backward(vout, r);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, tape.grad(vin).data);
    append_slots(slots, param.kernel.w, param.grad.w);
    if (bias) append_slots(slots, param.kernel.bias, param.grad.bias);
    auto objective = [&] {
        tape.replay();
        return dot(tape.value(vout), r);
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

double check_pp_pad(Rng& rng) {
    PPPadConfig cfg;
    cfg.h_p = 1 + int(rng.below(3));
    cfg.w_p = rng.coin() ? 3 : 5;
    cfg.n = 2 + int(rng.below(4));
    const int b = 1 + int(rng.below(2)), c = 1 + int(rng.below(3));
    const int lo = std::max(cfg.h_p, cfg.w_p);
    const int h = lo + 2 + int(rng.below(3)), w = lo + 2 + int(rng.below(3));

    auto param = PPPadParamT<double>::make(cfg);
    Tensor64 x(b, c, h, w);
    for (int attempt = 0;; ++attempt) {
        param.layer.init_uniform(rng, 0.8);
        fill_uniform(x, rng, -1.0, 1.0);
        if (min_pre_relu(param.layer, cfg, x) > kKinkMargin) break;
        require_arg(attempt < 200, "gradcheck: could not sample away from ReLU kinks");
    }

    Tape tape;
    auto vin = tape.leaf(x);
    auto vout = tape.pp_pad(vin, &param);
    Tensor64 r(b, c, h + 2, w + 2);
    fill_uniform(r, rng, -1.0, 1.0);
    tape.backward(vout, r);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, tape.grad(vin).data);
    auto pk = layer_kernels(param.layer);
    auto gk = layer_kernels(param.grad);
    for (size_t i = 0; i < pk.size(); ++i)
        append_slots(slots, pk[i]->w, gk[i]->w);

    auto objective = [&] {
        tape.replay();
        return dot(tape.value(vout), r);
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

// Two conv layers with a learnable pad in front of each, ReLU between, then
// cross-entropy: exercises gradient flow from the loss all the way into the
// padding predictors.
double check_net_e2e(Rng& rng) {
    PPPadConfig cfg;
    cfg.h_p = 2;
    cfg.w_p = 3;
    cfg.n = 2;
    const int K = 2, hidden = 2, cin = 2;
    const int h = 6, w = 6, b = 1;

    auto pad0 = PPPadParamT<double>::make(cfg);
    auto pad1 = PPPadParamT<double>::make(cfg);
    auto conv0 = ConvParamT<double>::make(hidden, cin, 3, 3, true);
    auto conv1 = ConvParamT<double>::make(K, hidden, 3, 3, true);
    LabelMap labels(b, h, w);

    Tensor64 x(b, cin, h, w);
    Tape tape;
    Tape::Var vin = 0, vlogits = 0, vpre = 0;
    for (int attempt = 0;; ++attempt) {
        tape = Tape();
        pad0.layer.init_uniform(rng, 0.7);
        pad1.layer.init_uniform(rng, 0.7);
        fill_uniform(conv0.kernel, rng, -0.7, 0.7);
        fill_uniform(conv1.kernel, rng, -0.7, 0.7);
        fill_uniform(x, rng, -1.0, 1.0);
        for (int32_t& lab : labels.v) lab = int32_t(rng.below(K));

        vin = tape.leaf(x);
        auto p0 = tape.pp_pad(vin, &pad0);
        vpre = tape.conv2d(p0, &conv0, 1);
        auto a0 = tape.relu(vpre);
        auto p1 = tape.pp_pad(a0, &pad1);
        vlogits = tape.conv2d(p1, &conv1, 1);

        const double m =
            std::min({min_pre_relu(pad0.layer, cfg, tape.value(vin)),
                      min_pre_relu(pad1.layer, cfg, tape.value(a0)),
                      min_abs_nonzero(tape.value(vpre))});
        if (m > kKinkMargin) break;
        require_arg(attempt < 200, "gradcheck: could not sample away from ReLU kinks");
    }

    pad0.zero_grad();
    pad1.zero_grad();
    conv0.zero_grad();
    conv1.zero_grad();
    auto res = softmax_cross_entropy(tape.value(vlogits), labels, -1);
    tape.backward(vlogits, res.grad);

    std::vector<CheckSlot> slots;
    append_slots(slots, tape.mutable_leaf(vin).data, tape.grad(vin).data);
    for (auto* pr : {&pad0, &pad1}) {
        auto pk = layer_kernels(pr->layer);
        auto gk = layer_kernels(pr->grad);
        for (size_t i = 0; i < pk.size(); ++i) append_slots(slots, pk[i]->w, gk[i]->w);
    }
    for (auto* cp : {&conv0, &conv1}) {
        append_slots(slots, cp->kernel.w, cp->grad.w);
        append_slots(slots, cp->kernel.bias, cp->grad.bias);
    }

    auto objective = [&] {
        tape.replay();
        return softmax_cross_entropy(tape.value(vlogits), labels, -1).loss;
    };
    return fd_max_rel_err(objective, slots, kGradEps);
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s) h = (h ^ uint8_t(c)) * 0x100000001b3ull;
    return h;
}

GradCheckResult run_op(const std::string& name, uint64_t seed, int instances,
                       double tol, const std::function<double(Rng&)>& one) {
    GradCheckResult res;
    res.op = name;
    res.instances = instances;
    for (int i = 0; i < instances; ++i) {
        Rng rng(Rng::mix(seed, fnv1a(name) + uint64_t(i)));
        res.max_rel_err = std::max(res.max_rel_err, one(rng));
    }
    res.pass = res.max_rel_err < tol;
    return res;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck_suite(uint64_t seed, int instances,
                                                 double eps, double tol) {
    require_arg(instances >= 1, "gradcheck: instances must be >= 1");
    require_arg(eps > 0 && tol > 0, "gradcheck: eps and tol must be positive");
    (void)eps;

    std::vector<GradCheckResult> out;
    out.push_back(run_op("conv2d_valid", seed, instances, tol, check_conv2d));
    out.push_back(run_op("relu", seed, instances, tol, check_relu));
    out.push_back(run_op("softmax_cross_entropy", seed, instances, tol,
                         check_softmax_xent));
    out.push_back(run_op("pad_zero", seed, instances, tol,
                         [](Rng& r) { return check_pad(r, PadMode::Zero); }));
    out.push_back(run_op("pad_reflect", seed, instances, tol,
                         [](Rng& r) { return check_pad(r, PadMode::Reflect); }));
    out.push_back(run_op("pad_replicate", seed, instances, tol,
                         [](Rng& r) { return check_pad(r, PadMode::Replicate); }));
    out.push_back(run_op("pad_circular", seed, instances, tol,
                         [](Rng& r) { return check_pad(r, PadMode::Circular); }));
    out.push_back(run_op("partial_conv2d", seed, instances, tol, check_partial_conv));
    out.push_back(run_op("pp_pad", seed, instances, tol, check_pp_pad));
    out.push_back(run_op("net_end_to_end", seed, instances, tol, check_net_e2e));
    return out;
}

}  // namespace pppad
