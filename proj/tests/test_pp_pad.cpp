#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "pppad/ops.hpp"
#include "pppad/pp_pad.hpp"
#include "pppad/reference.hpp"

using namespace pppad;

namespace {

Tensor randt(Rng& rng, int n, int c, int h, int w) {
    Tensor t(n, c, h, w);
    for (auto& v : t.data) v = float(rng.gauss());
    return t;
}

PPPadLayerT<float> random_layer(const PPPadConfig& cfg, uint64_t seed) {
    auto layer = PPPadLayerT<float>::make(cfg);
    Rng rng(seed);
    layer.init_uniform(rng, 0.5f);
    return layer;
}

}  // namespace

TEST_CASE("edge predictor weight counts") {
    // per edge: n*h_p*w_p + n^2 + n; (2,3): 6n + n^2 + n
    for (int n : {1, 8, 16}) {
        PPPadConfig cfg;
        cfg.h_p = 2;
        cfg.w_p = 3;
        cfg.n = n;
        const auto pred = EdgePredictorT<float>::make(cfg);
        CHECK(pred.weight_count() == size_t(6 * n + n * n + n));
        for (long long C : {1, 3, 64}) {
            const long long shared = param_count(cfg, int(C), false);
            const long long naive = param_count(cfg, int(C), true);
            CHECK(shared == 6 * n + n * n + n);
            CHECK(naive == 6 * C * n + n * n + C * n);
            CHECK(naive - shared == 7LL * n * (C - 1));
        }
    }
}

TEST_CASE("predictors are bias free") {
    PPPadConfig cfg;
    const auto layer = PPPadLayerT<float>::make(cfg);
    for (Edge e : kEdges) {
        CHECK_FALSE(layer.edge(e).w1.has_bias);
        CHECK_FALSE(layer.edge(e).w2.has_bias);
        CHECK_FALSE(layer.edge(e).w3.has_bias);
    }
}

TEST_CASE("strip extraction is canonical: depth 0 nearest the edge") {
    Tensor fm(1, 1, 4, 5);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 5; ++x) fm.at(0, 0, y, x) = float(10 * y + x);

    const auto top = extract_edge_strip(fm, Edge::Top, 2);
    CHECK(top.h == 2);
    CHECK(top.w == 5);
    CHECK(top.at(0, 0, 0, 1) == 1.0f);   // row 0 is the edge row
    CHECK(top.at(0, 0, 1, 1) == 11.0f);  // depth grows inward

    const auto bottom = extract_edge_strip(fm, Edge::Bottom, 2);
    CHECK(bottom.at(0, 0, 0, 1) == 31.0f);
    CHECK(bottom.at(0, 0, 1, 1) == 21.0f);

    const auto left = extract_edge_strip(fm, Edge::Left, 2);
    CHECK(left.h == 2);
    CHECK(left.w == 4);  // sliding axis is the image y axis
    CHECK(left.at(0, 0, 0, 2) == 20.0f);
    CHECK(left.at(0, 0, 1, 2) == 21.0f);

    const auto right = extract_edge_strip(fm, Edge::Right, 2);
    CHECK(right.at(0, 0, 0, 2) == 24.0f);
    CHECK(right.at(0, 0, 1, 2) == 23.0f);
}

TEST_CASE("scatter_edge_strip is the adjoint of extract_edge_strip") {
    Rng rng(31);
    const auto fm = randt(rng, 2, 3, 5, 6);
    for (Edge e : kEdges) {
        const auto strip = extract_edge_strip(fm, e, 2);
        Tensor g(strip.n, strip.c, strip.h, strip.w);
        for (auto& v : g.data) v = float(rng.gauss());
        Tensor gfm(fm.n, fm.c, fm.h, fm.w);
        scatter_edge_strip(gfm, g, e, 2);
        double lhs = 0, rhs = 0;
        for (size_t i = 0; i < strip.size(); ++i)
            lhs += double(g.data[i]) * strip.data[i];
        for (size_t i = 0; i < fm.size(); ++i)
            rhs += double(gfm.data[i]) * fm.data[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("zero-weight pp_pad equals zero padding bitwise") {
    PPPadConfig cfg;
    const auto layer = PPPadLayerT<float>::make(cfg);  // weights start at zero
    Rng rng(32);
    const auto fm = randt(rng, 2, 4, 6, 7);
    const auto a = pp_pad(fm, layer, cfg);
    const auto b = pad(fm, PadMode::Zero, 1);
    REQUIRE(a.same_shape(b));
    CHECK(std::memcmp(a.data.data(), b.data.data(),
                      a.size() * sizeof(float)) == 0);
}

TEST_CASE("averaging construction reproduces a constant input") {
    PPPadConfig cfg;
    auto layer = PPPadLayerT<float>::make(cfg);
    const float inv_win = 1.0f / float(cfg.h_p * cfg.w_p);
    const float inv_n = 1.0f / float(cfg.n);
    for (Edge e : kEdges) {
        auto& pred = layer.edge(e);
        for (auto& v : pred.w1.w) v = inv_win;
        for (auto& v : pred.w2.w) v = inv_n;
        for (auto& v : pred.w3.w) v = inv_n;
    }

    const float c = 0.7f;
    Tensor fm(1, 3, 5, 6);
    fm.fill(c);
    const auto out = pp_pad(fm, layer, cfg);
    const int gap = pp_end_gap(cfg);
    REQUIRE(gap == 2);

    for (int ci = 0; ci < 3; ++ci) {
        for (int x = gap; x < out.w - gap; ++x) {
            CHECK(out.at(0, ci, 0, x) == doctest::Approx(c).epsilon(1e-6));
            CHECK(out.at(0, ci, out.h - 1, x) ==
                  doctest::Approx(c).epsilon(1e-6));
        }
        for (int y = gap; y < out.h - gap; ++y) {
            CHECK(out.at(0, ci, y, 0) == doctest::Approx(c).epsilon(1e-6));
            CHECK(out.at(0, ci, y, out.w - 1) ==
                  doctest::Approx(c).epsilon(1e-6));
        }
    }
}

TEST_CASE("corner and end-gap cells are exactly zero") {
    PPPadConfig cfg;
    const auto layer = random_layer(cfg, 33);
    Rng rng(34);
    auto fm = randt(rng, 1, 2, 5, 6);
    for (auto& v : fm.data) v = std::abs(v) + 0.1f;  // keep predictions live
    const auto out = pp_pad(fm, layer, cfg);
    const int gap = pp_end_gap(cfg);

    for (int ci = 0; ci < 2; ++ci) {
        for (int x = 0; x < gap; ++x) {
            CHECK(out.at(0, ci, 0, x) == 0.0f);
            CHECK(out.at(0, ci, 0, out.w - 1 - x) == 0.0f);
            CHECK(out.at(0, ci, out.h - 1, x) == 0.0f);
            CHECK(out.at(0, ci, out.h - 1, out.w - 1 - x) == 0.0f);
        }
        for (int y = 0; y < gap; ++y) {
            CHECK(out.at(0, ci, y, 0) == 0.0f);
            CHECK(out.at(0, ci, out.h - 1 - y, 0) == 0.0f);
            CHECK(out.at(0, ci, y, out.w - 1) == 0.0f);
            CHECK(out.at(0, ci, out.h - 1 - y, out.w - 1) == 0.0f);
        }
    }
}

TEST_CASE("interior of pp_pad output is the input, copied bit for bit") {
    PPPadConfig cfg;
    const auto layer = random_layer(cfg, 35);
    Rng rng(36);
    const auto fm = randt(rng, 2, 3, 6, 8);
    const auto out = pp_pad(fm, layer, cfg);
    for (int b = 0; b < fm.n; ++b)
        for (int ci = 0; ci < fm.c; ++ci)
            for (int y = 0; y < fm.h; ++y)
                for (int x = 0; x < fm.w; ++x)
                    CHECK(out.at(b, ci, y + 1, x + 1) == fm.at(b, ci, y, x));
}

TEST_CASE("channel permutation equivariance is bit exact") {
    // shared predictors act per channel, so permuting input channels
    // permutes the padded output channels identically
    PPPadConfig cfg;
    const auto layer = random_layer(cfg, 37);
    Rng rng(38);
    const auto fm = randt(rng, 1, 4, 6, 6);

    const std::array<int, 4> cperm{2, 0, 3, 1};
    Tensor permuted(1, 4, 6, 6);
    for (int ci = 0; ci < 4; ++ci)
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 6; ++x)
                permuted.at(0, ci, y, x) = fm.at(0, cperm[ci], y, x);

    const auto a = pp_pad(permuted, layer, cfg);
    const auto b = pp_pad(fm, layer, cfg);
    for (int ci = 0; ci < 4; ++ci)
        for (int y = 0; y < a.h; ++y)
            for (int x = 0; x < a.w; ++x)
                CHECK(a.at(0, ci, y, x) == b.at(0, cperm[ci], y, x));
}

TEST_CASE("pp_pad matches the per-channel reference bitwise") {
    for (auto [hp, wp, n] : {std::array<int, 3>{2, 3, 8},
                             std::array<int, 3>{3, 5, 4},
                             std::array<int, 3>{1, 3, 2}}) {
        PPPadConfig cfg;
        cfg.h_p = hp;
        cfg.w_p = wp;
        cfg.n = n;
        const auto layer = random_layer(cfg, uint64_t(100 + n));
        Rng rng(uint64_t(200 + n));
        const auto fm = randt(rng, 2, 3, 7, 8);
        const auto a = pp_pad(fm, layer, cfg);
        const auto b = ref::pp_pad(fm, layer, cfg);
        REQUIRE(a.same_shape(b));
        CHECK(std::memcmp(a.data.data(), b.data.data(),
                          a.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("predicted values are nonnegative (final ReLU)") {
    PPPadConfig cfg;
    auto layer = random_layer(cfg, 39);
    for (auto& v : layer.top.w3.w) v = -std::abs(v);  // force negatives
    Rng rng(40);
    auto fm = randt(rng, 1, 2, 5, 6);
    for (auto& v : fm.data) v = std::abs(v) + 0.1f;
    const auto out = pp_pad(fm, layer, cfg);
    for (int x = 0; x < out.w; ++x) CHECK(out.at(0, 0, 0, x) == 0.0f);
}

TEST_CASE("pp_pad gradients flow to every predictor stage") {
    PPPadConfig cfg;
    cfg.n = 4;
    auto layer = random_layer(cfg, 41);
    Rng rng(42);
    auto fm = randt(rng, 1, 2, 5, 6);
    for (auto& v : fm.data) v = std::abs(v) + 0.2f;

    const auto out = pp_pad(fm, layer, cfg);
    Tensor gout(out.n, out.c, out.h, out.w);
    for (auto& v : gout.data) v = 1.0f;

    auto grads = pp_pad_backward(gout, fm, layer, cfg);
    CHECK(grads.fm.same_shape(fm));

    double total = 0;
    grads.layer.for_each_kernel([&](ConvKernelT<float>& k) {
        for (float v : k.w) total += std::abs(double(v));
    });
    CHECK(total > 0.0);
}
