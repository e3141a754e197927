#include "pppad/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pppad/ops.hpp"
#include "pppad/parallel.hpp"

namespace pppad {

double poly_lr(int epoch, int max_epoch, double base_lr, double power) {
    require_arg(max_epoch >= 1, "poly_lr: max_epoch must be >= 1");
    require_arg(epoch >= 0 && epoch <= max_epoch,
                "poly_lr: epoch must be in [0, max_epoch]");
    require_arg(base_lr >= 0 && power >= 0, "poly_lr: base_lr and power must be >= 0");
    return base_lr * std::pow(1.0 - double(epoch) / double(max_epoch), power);
}

Sample crop_sample(const Sample& smp, int oy, int ox, int s) {
    require_arg(s >= 1 && oy >= 0 && ox >= 0 && oy + s <= smp.image.h &&
                    ox + s <= smp.image.w,
                "crop_sample: window outside the image");
    Sample out;
    out.image = Tensor(1, smp.image.c, s, s);
    out.labels = LabelMap(1, s, s);
    for (int c = 0; c < smp.image.c; ++c)
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x)
                out.image.at(0, c, y, x) = smp.image.at(0, c, oy + y, ox + x);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            out.labels.at(0, y, x) = smp.labels.at(0, oy + y, ox + x);
    return out;
}

namespace {

// quarter turn: out(y, x) = in(x, S-1-y)
Sample rot90(const Sample& smp) {
    const int s = smp.image.h;
    Sample out;
    out.image = Tensor(1, smp.image.c, s, s);
    out.labels = LabelMap(1, s, s);
    for (int c = 0; c < smp.image.c; ++c)
        for (int y = 0; y < s; ++y)
            for (int x = 0; x < s; ++x)
                out.image.at(0, c, y, x) = smp.image.at(0, c, x, s - 1 - y);
    for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x)
            out.labels.at(0, y, x) = smp.labels.at(0, x, s - 1 - y);
    return out;
}

Sample mirror(const Sample& smp) {
    const int h = smp.image.h, w = smp.image.w;
    Sample out;
    out.image = Tensor(1, smp.image.c, h, w);
    out.labels = LabelMap(1, h, w);
    for (int c = 0; c < smp.image.c; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.image.at(0, c, y, x) = smp.image.at(0, c, y, w - 1 - x);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.labels.at(0, y, x) = smp.labels.at(0, y, w - 1 - x);
    return out;
}

}  // namespace

Sample augment_sample(const Sample& smp, int crop, Rng& rng) {
    require_arg(crop <= smp.image.h && crop <= smp.image.w,
                "augment: crop larger than image");
    const int oy = int(rng.below(uint32_t(smp.image.h - crop + 1)));
    const int ox = int(rng.below(uint32_t(smp.image.w - crop + 1)));
    Sample out = crop_sample(smp, oy, ox, crop);
    if (rng.coin()) out = mirror(out);
    const uint32_t turns = rng.below(4);
    for (uint32_t t = 0; t < turns; ++t) out = rot90(out);
    return out;
}

PhaseResult train_phase(SegNet& net, const Dataset& ds, const TrainSettings& ts,
                        int epochs, uint64_t seed) {
    require_arg(!ds.samples.empty(), "train: empty dataset");
    require_arg(epochs >= 0, "train: negative epoch count");
    require_arg(ts.batch_size >= 1, "train: batch_size must be >= 1");
    const int crop = ts.crop;
    for (const Sample& s : ds.samples)
        require_dim(s.image.h >= crop && s.image.w >= crop,
                    "train: crop larger than dataset images");

    Rng rng(Rng::mix(seed, 0x747261696eull));  // per-phase stream
    PhaseResult out;

    std::vector<size_t> order(ds.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const double lr = poly_lr(epoch, epochs, ts.base_lr, ts.power);
        for (size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[size_t(rng.below(uint32_t(i)))]);

        double loss_sum = 0;
        long long pixel_sum = 0;
        for (size_t start = 0; start < order.size(); start += size_t(ts.batch_size)) {
            const int bsz = int(std::min(order.size() - start, size_t(ts.batch_size)));
            Tensor batch(bsz, net.in_channels, crop, crop);
            LabelMap labels(bsz, crop, crop);
            for (int b = 0; b < bsz; ++b) {
                const Sample& src = ds.samples[order[start + size_t(b)]];
                const Sample smp =
                    ts.augment ? augment_sample(src, crop, rng)
                               : crop_sample(src, (src.image.h - crop) / 2,
                                             (src.image.w - crop) / 2, crop);
                require_dim(smp.image.c == net.in_channels,
                            "train: channel count mismatch");
                for (int c = 0; c < net.in_channels; ++c)
                    for (int y = 0; y < crop; ++y)
                        for (int x = 0; x < crop; ++x)
                            batch.at(b, c, y, x) = smp.image.at(0, c, y, x);
                for (int y = 0; y < crop; ++y)
                    for (int x = 0; x < crop; ++x)
                        labels.at(b, y, x) = smp.labels.at(0, y, x);
            }

            GradTape tape;
            const auto vin = tape.leaf(std::move(batch));
            const auto vlogits = net.forward(tape, vin);
            const auto xent = softmax_cross_entropy(tape.value(vlogits), labels);
            if (!std::isfinite(double(xent.loss)))
                throw std::runtime_error(
                    "training diverged: non-finite loss at epoch " +
                    std::to_string(epoch));
            net.zero_grad();
            tape.backward(vlogits, xent.grad);
            net.step(float(lr), float(ts.momentum), float(ts.weight_decay));

            const long long px = (long long)(bsz)*crop * crop;
            loss_sum += double(xent.loss) * double(px);
            pixel_sum += px;
        }
        const double mean_loss = loss_sum / double(pixel_sum);
        if (!std::isfinite(mean_loss))
            throw std::runtime_error(
                "training diverged: non-finite epoch loss at epoch " +
                std::to_string(epoch));
        out.epoch_loss.push_back(mean_loss);
        out.epoch_lr.push_back(lr);
    }
    return out;
}

EvalResult evaluate_dataset(const SegNet& net, const Dataset& ds, int patch,
                            int stride, double theta, bool keep_entropy_maps) {
    require_arg(!ds.samples.empty(), "eval: empty dataset");
    const int K = ds.spec.classes;

    InvarianceAccumulator acc(theta, K);
    EvalResult res;
    res.confusion = ConfusionMatrix(K);

    for (const Sample& smp : ds.samples) {
        const PatchGrid grid = build_patch_grid(smp.image.h, smp.image.w, patch, stride);
        const int np = int(grid.coords.size());

        Tensor patches(np, smp.image.c, patch, patch);
        for (int pi = 0; pi < np; ++pi) {
            const auto [oy, ox] = grid.coords[size_t(pi)];
            for (int c = 0; c < smp.image.c; ++c)
                for (int y = 0; y < patch; ++y)
                    for (int x = 0; x < patch; ++x)
                        patches.at(pi, c, y, x) = smp.image.at(0, c, oy + y, ox + x);
        }
        const LabelMap pred = net.predict(patches);

        const VoteHistogram votes = accumulate_votes(grid, pred, K);
        acc.add(votes);
        for (int pi = 0; pi < np; ++pi) {
            const auto [oy, ox] = grid.coords[size_t(pi)];
            for (int y = 0; y < patch; ++y)
                for (int x = 0; x < patch; ++x)
                    res.confusion.add(smp.labels.at(0, oy + y, ox + x),
                                      pred.at(pi, y, x));
        }
        if (keep_entropy_maps) res.entropy_maps.push_back(entropy_map(votes));
    }

    res.report = acc.finalize();
    res.miou_value = miou(res.confusion);
    return res;
}

}  // namespace pppad
