// Times the OpenMP kernels against the serial reference implementations and
// verifies agreement: forward paths must match bit for bit (identical
// accumulation order), the scatter-vs-gather backward pair is compared at
// tolerance, and every parallel kernel must be bit-identical to itself with
// threading disabled. Nonzero exit on any mismatch. --quick shrinks sizes and
// iterations for use as a smoke test.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "pppad/ops.hpp"
#include "pppad/parallel.hpp"
#include "pppad/reference.hpp"

namespace {

using namespace pppad;

double time_median(const std::function<void()>& fn, int iters) {
    std::vector<double> t;
    t.reserve(size_t(iters));
    for (int i = 0; i < iters; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const std::chrono::duration<double> d = std::chrono::steady_clock::now() - t0;
        t.push_back(d.count());
    }
    std::sort(t.begin(), t.end());
    const size_t n = t.size();
    return n % 2 ? t[n / 2] : 0.5 * (t[n / 2 - 1] + t[n / 2]);
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data.data(), b.data.data(), a.data.size() * 4) == 0;
}

double max_rel_diff(const std::vector<float>& a, const std::vector<float>& b) {
    double worst = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = std::abs(double(a[i]) - double(b[i])) /
                         std::max(1.0, std::abs(double(a[i])));
        worst = std::max(worst, d);
    }
    return worst;
}

int failures = 0;

void row(const std::string& name, double serial_s, double parallel_s,
         const std::string& check, bool ok) {
    std::printf("%-26s %10.4fs %10.4fs %7.2fx  %s\n", name.c_str(), serial_s,
                parallel_s, serial_s / parallel_s, check.c_str());
    if (!ok) ++failures;
}

// Same kernel with threading toggled must not change a single bit.
template <typename Fn>
bool toggle_identical(const Fn& fn) {
    parallel::set_enabled(false);
    const Tensor off = fn();
    parallel::set_enabled(true);
    const Tensor on = fn();
    return bitwise_equal(off, on);
}

}  // namespace

int main(int argc, char** argv) {
    bool quick = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "--quick") quick = true;

    const int B = quick ? 2 : 4, C = quick ? 8 : 16, H = quick ? 32 : 96,
              W = quick ? 32 : 96;
    const int iters = quick ? 2 : 7;

    Rng rng(7);
    Tensor x(B, C, H, W);
    fill_uniform(x, rng, -1.0, 1.0);
    ConvKernel k(C, C, 3, 3, true);
    fill_uniform(k, rng, -0.3, 0.3);

    std::printf("batch=%d channels=%d size=%dx%d iters=%d threads<=%d\n\n", B, C, H,
                W, iters, parallel::thread_count());
    std::printf("%-26s %11s %11s %8s  %s\n", "kernel", "serial", "parallel",
                "speedup", "check");

    {
        parallel::set_enabled(true);
        const Tensor par = conv2d_valid(x, k);
        const double tp = time_median([&] { conv2d_valid(x, k); }, iters);
        parallel::set_enabled(false);
        const Tensor ser = ref::conv2d_valid(x, k);
        const double ts = time_median([&] { ref::conv2d_valid(x, k); }, iters);
        parallel::set_enabled(true);
        const bool ok = bitwise_equal(par, ser) &&
                        toggle_identical([&] { return conv2d_valid(x, k); });
        row("conv2d_valid", ts, tp, ok ? "bitwise equal" : "MISMATCH", ok);
    }

    {
        const Tensor go = [&] {
            Tensor g(B, C, H - 2, W - 2);
            Rng r2(11);
            fill_uniform(g, r2, -1.0, 1.0);
            return g;
        }();
        parallel::set_enabled(true);
        const ConvGradsT<float> par = conv2d_backward(go, x, k);
        const double tp = time_median([&] { conv2d_backward(go, x, k); }, iters);
        parallel::set_enabled(false);
        const ConvGradsT<float> ser = ref::conv2d_backward(go, x, k);
        const double ts = time_median([&] { ref::conv2d_backward(go, x, k); }, iters);
        parallel::set_enabled(true);

        const double rel = std::max(max_rel_diff(par.input.data, ser.input.data),
                                    max_rel_diff(par.kernel.w, ser.kernel.w));
        const bool tog = toggle_identical([&] { return conv2d_backward(go, x, k).input; });
        const bool ok = rel < 1e-5 && tog;
        char buf[64];
        std::snprintf(buf, sizeof buf, "max rel %.1e%s", rel,
                      tog ? "" : " TOGGLE MISMATCH");
        row("conv2d_backward", ts, tp, buf, ok);
    }

    for (PadMode mode : {PadMode::Zero, PadMode::Reflect, PadMode::Replicate,
                         PadMode::Circular}) {
        parallel::set_enabled(true);
        const Tensor par = pad(x, mode, 1);
        const double tp = time_median([&] { pad(x, mode, 1); }, iters);
        parallel::set_enabled(false);
        const Tensor ser = ref::pad(x, mode, 1);
        const double ts = time_median([&] { ref::pad(x, mode, 1); }, iters);
        parallel::set_enabled(true);
        const bool ok = bitwise_equal(par, ser) &&
                        toggle_identical([&] { return pad(x, mode, 1); });
        row(std::string("pad_") + pad_mode_name(mode), ts, tp,
            ok ? "bitwise equal" : "MISMATCH", ok);
    }

    {
        parallel::set_enabled(true);
        const Tensor par = partial_conv2d(x, k, 1);
        const double tp = time_median([&] { partial_conv2d(x, k, 1); }, iters);
        parallel::set_enabled(false);
        const Tensor ser = partial_conv2d(x, k, 1);
        const double ts = time_median([&] { partial_conv2d(x, k, 1); }, iters);
        parallel::set_enabled(true);
        const bool ok = bitwise_equal(par, ser);
        row("partial_conv2d", ts, tp, ok ? "bitwise equal" : "MISMATCH", ok);
    }

    {
        PPPadConfig cfg{2, 3, 8};
        PPPadLayerT<float> layer = PPPadLayerT<float>::make(cfg);
        Rng r3(13);
        layer.init_uniform(r3, 0.3f);
        parallel::set_enabled(true);
        const Tensor par = pp_pad(x, layer, cfg);
        const double tp = time_median([&] { pp_pad(x, layer, cfg); }, iters);
        parallel::set_enabled(false);
        const Tensor ser = ref::pp_pad(x, layer, cfg);
        const double ts = time_median([&] { ref::pp_pad(x, layer, cfg); }, iters);
        parallel::set_enabled(true);
        const bool ok = bitwise_equal(par, ser) &&
                        toggle_identical([&] { return pp_pad(x, layer, cfg); });
        row("pp_pad(2x3,n=8)", ts, tp, ok ? "bitwise equal" : "MISMATCH", ok);
    }

    std::printf("\n%s\n", failures == 0 ? "all checks passed" : "CHECKS FAILED");
    return failures == 0 ? 0 : 1;
}
