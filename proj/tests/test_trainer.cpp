#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <limits>

#include "pppad/trainer.hpp"

using namespace pppad;

namespace {

// image channel 0 carries the pixel's label so any geometric transform must
// keep the two aligned
Sample tagged_sample(int H, int W, int K) {
    Sample s;
    s.image = Tensor(1, 3, H, W);
    s.labels = LabelMap(1, H, W);
    int cls = 0;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            s.labels.at(0, y, x) = cls;
            s.image.at(0, 0, y, x) = float(cls);
            s.image.at(0, 1, y, x) = float(y);
            s.image.at(0, 2, y, x) = float(x);
            cls = (cls + 1) % K;
        }
    return s;
}

// hand-built stand-in for the generator (which wants real image sizes):
// labels are a pointwise threshold of channel 0, so a small conv net can cut
// the loss within a few epochs
Dataset tiny_dataset(int count, int H, int W, int K, uint64_t seed) {
    Dataset ds;
    ds.spec.count = count;
    ds.spec.height = H;
    ds.spec.width = W;
    ds.spec.classes = K;
    ds.spec.noise = 0.0;
    ds.spec.seed = seed;
    Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        Sample s;
        s.image = Tensor(1, 3, H, W);
        s.labels = LabelMap(1, H, W);
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x) {
                const float v = float(rng.gauss());
                s.image.at(0, 0, y, x) = v;
                s.image.at(0, 1, y, x) = float(rng.gauss());
                s.image.at(0, 2, y, x) = float(rng.gauss());
                const int cls = v < -0.3f ? 0 : (v < 0.4f ? 1 : 2);
                s.labels.at(0, y, x) = cls % K;
            }
        ds.samples.push_back(std::move(s));
    }
    return ds;
}

}  // namespace

TEST_CASE("poly_lr pinned values") {
    CHECK(poly_lr(0, 160, 0.01, 0.9) == doctest::Approx(0.01).epsilon(1e-15));
    CHECK(poly_lr(160, 160, 0.01, 0.9) == 0.0);
    CHECK(std::abs(poly_lr(80, 160, 0.01, 0.9) - 0.0053589) < 1e-7);
}

TEST_CASE("poly_lr validates its range") {
    CHECK_THROWS_AS((void)poly_lr(5, 4, 0.01, 0.9), ArgError);
    CHECK_THROWS_AS((void)poly_lr(0, 0, 0.01, 0.9), ArgError);
    CHECK_THROWS_AS((void)poly_lr(-1, 10, 0.01, 0.9), ArgError);
}

TEST_CASE("crop_sample takes the requested window") {
    const auto s = tagged_sample(8, 10, 3);
    const auto c = crop_sample(s, 2, 3, 4);
    CHECK(c.image.h == 4);
    CHECK(c.image.w == 4);
    CHECK(c.labels.h == 4);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x) {
            CHECK(c.image.at(0, 1, y, x) == float(y + 2));
            CHECK(c.image.at(0, 2, y, x) == float(x + 3));
            CHECK(c.labels.at(0, y, x) == s.labels.at(0, y + 2, x + 3));
        }
}

TEST_CASE("crop_sample rejects out-of-bounds windows") {
    const auto s = tagged_sample(8, 8, 2);
    CHECK_THROWS_AS((void)crop_sample(s, 5, 0, 4), ArgError);
    CHECK_THROWS_AS((void)crop_sample(s, 0, -1, 4), ArgError);
}

TEST_CASE("augment_sample keeps image and labels aligned") {
    const auto s = tagged_sample(12, 12, 4);
    Rng rng(61);
    for (int trial = 0; trial < 32; ++trial) {
        const auto a = augment_sample(s, 8, rng);
        REQUIRE(a.image.h == 8);
        REQUIRE(a.image.w == 8);
        REQUIRE(a.labels.h == 8);
        REQUIRE(a.labels.w == 8);
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x)
                CHECK(int(a.image.at(0, 0, y, x)) == a.labels.at(0, y, x));
    }
}

TEST_CASE("augment_sample covers flips and rotations") {
    // over many draws the (y, x) tags must land in transposed and mirrored
    // orientations, not only axis-aligned crops
    const auto s = tagged_sample(8, 8, 2);
    Rng rng(62);
    bool saw_transpose = false, saw_mirror = false;
    for (int trial = 0; trial < 64; ++trial) {
        const auto a = augment_sample(s, 8, rng);  // full-size crop
        const float dy = a.image.at(0, 1, 0, 1) - a.image.at(0, 1, 0, 0);
        const float dx = a.image.at(0, 2, 0, 1) - a.image.at(0, 2, 0, 0);
        if (dy != 0.0f && dx == 0.0f) saw_transpose = true;  // x axis now walks y
        if (dx == -1.0f || dy == -1.0f) saw_mirror = true;
    }
    CHECK(saw_transpose);
    CHECK(saw_mirror);
}

TEST_CASE("augment_sample is deterministic given the rng state") {
    const auto s = tagged_sample(10, 10, 3);
    Rng a(63), b(63);
    for (int trial = 0; trial < 8; ++trial) {
        const auto x = augment_sample(s, 6, a);
        const auto y = augment_sample(s, 6, b);
        CHECK(x.image.data == y.image.data);
        CHECK(x.labels.v == y.labels.v);
    }
}

TEST_CASE("train_phase reduces the loss on a tiny problem") {
    const auto ds = tiny_dataset(8, 16, 16, 3, 71);
    Rng rng(72);
    auto net = SegNet::make(3, {8}, 3, PadMode::Zero, PPPadConfig{}, rng);

    TrainSettings ts;
    ts.base_lr = 0.02;
    ts.batch_size = 4;
    ts.crop = 12;
    ts.augment = false;
    const auto res = train_phase(net, ds, ts, 6, 73);
    REQUIRE(res.epoch_loss.size() == 6u);
    REQUIRE(res.epoch_lr.size() == 6u);
    CHECK(res.epoch_lr[0] == doctest::Approx(0.02));
    CHECK(res.epoch_loss.back() < res.epoch_loss.front());
    for (double l : res.epoch_loss) CHECK(std::isfinite(l));
}

TEST_CASE("train_phase is bit-deterministic") {
    const auto ds = tiny_dataset(6, 16, 16, 3, 74);
    auto run = [&]() {
        Rng rng(75);
        auto net = SegNet::make(3, {8}, 3, PadMode::Zero, PPPadConfig{}, rng);
        TrainSettings ts;
        ts.batch_size = 4;
        ts.crop = 12;
        const auto res = train_phase(net, ds, ts, 3, 76);
        std::vector<float> tail = net.convs.back().kernel.w;
        return std::pair(res.epoch_loss, tail);
    };
    const auto a = run();
    const auto b = run();
    CHECK(a.first == b.first);
    CHECK(std::memcmp(a.second.data(), b.second.data(),
                      a.second.size() * sizeof(float)) == 0);
}

TEST_CASE("set_mode swap preserves conv weights bitwise") {
    Rng rng(77);
    auto net = SegNet::make(3, {8, 8}, 4, PadMode::Zero, PPPadConfig{}, rng);
    std::vector<std::vector<float>> before;
    for (const auto& c : net.convs) before.push_back(c.kernel.w);

    Rng swap_rng(78);
    net.set_mode(PadMode::PPPad, swap_rng);
    CHECK(net.mode == PadMode::PPPad);
    REQUIRE(net.pads.size() == net.convs.size());
    for (size_t i = 0; i < net.convs.size(); ++i)
        CHECK(net.convs[i].kernel.w == before[i]);

    // predictors come up freshly initialized and nonzero
    double mag = 0;
    net.pads[0].layer.for_each_kernel([&](ConvKernelT<float>& k) {
        for (float v : k.w) mag += std::abs(double(v));
    });
    CHECK(mag > 0.0);
}

TEST_CASE("swap to pp-pad is reproducible from the seed") {
    auto build = [](uint64_t s) {
        Rng rng(91);
        auto net = SegNet::make(3, {8}, 3, PadMode::Zero, PPPadConfig{}, rng);
        Rng sw(s);
        net.set_mode(PadMode::PPPad, sw);
        std::vector<float> flat;
        net.pads[0].layer.for_each_kernel([&](ConvKernelT<float>& k) {
            flat.insert(flat.end(), k.w.begin(), k.w.end());
        });
        return flat;
    };
    CHECK(build(5) == build(5));
    CHECK(build(5) != build(6));
}

TEST_CASE("evaluate_dataset produces a bounded report and confusion") {
    const auto ds = tiny_dataset(3, 20, 20, 3, 79);
    Rng rng(80);
    const auto net = SegNet::make(3, {8}, 3, PadMode::Replicate, PPPadConfig{}, rng);
    const auto ev = evaluate_dataset(net, ds, 12, 6, 0.0, true);
    CHECK(ev.report.n_pixels == 3LL * 20 * 20);
    CHECK(ev.report.k == 3);
    CHECK(ev.report.mean_e >= 0.0);
    CHECK(ev.report.mean_e <= std::log2(3.0) + 1e-12);
    CHECK(ev.report.dis_r >= 0.0);
    CHECK(ev.report.dis_r <= 1.0);
    CHECK(ev.miou_value >= 0.0);
    CHECK(ev.miou_value <= 1.0);
    CHECK(ev.confusion.total() > 0u);
    CHECK(ev.entropy_maps.size() == 3u);
    CHECK(ev.entropy_maps[0].h == 20);
}

TEST_CASE("training hitting a non-finite loss raises") {
    const auto ds = tiny_dataset(4, 16, 16, 3, 81);
    Rng rng(82);
    auto net = SegNet::make(3, {8}, 3, PadMode::Zero, PPPadConfig{}, rng);
    // must be the classifier layer: a NaN under a hidden ReLU clamps to zero
    net.convs.back().kernel.w[0] = std::numeric_limits<float>::quiet_NaN();
    TrainSettings ts;
    ts.batch_size = 4;
    ts.crop = 12;
    CHECK_THROWS_AS((void)train_phase(net, ds, ts, 3, 83), std::runtime_error);
}
