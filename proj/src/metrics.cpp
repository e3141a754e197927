#include "pppad/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "pppad/io.hpp"

namespace pppad {

namespace {

std::vector<int> axis_positions(int extent, int P, int S) {
    std::vector<int> pos;
    const int last = extent - P;
    for (int t = 0;; t += S) {
        if (t >= last) {
            pos.push_back(last);
            break;
        }
        pos.push_back(t);
    }
    return pos;
}

}  // namespace

PatchGrid build_patch_grid(int H, int W, int P, int S) {
    require_arg(P >= 1 && S >= 1, "patch grid: P and S must be >= 1");
    require_arg(P <= H && P <= W, "patch grid: patch larger than image");
    require_arg(S <= P, "patch grid: stride larger than patch leaves gaps");

    PatchGrid g;
    g.h = H;
    g.w = W;
    g.patch = P;
    g.stride = S;
    const std::vector<int> ys = axis_positions(H, P, S);
    const std::vector<int> xs = axis_positions(W, P, S);
    g.coords.reserve(ys.size() * xs.size());
    for (int y : ys)
        for (int x : xs) g.coords.emplace_back(y, x);
    return g;
}

VoteHistogram accumulate_votes(const PatchGrid& grid, const LabelMap& patch_maps,
                               int K) {
    require_arg(K >= 1, "accumulate_votes: K must be >= 1");
    require_dim(patch_maps.n == int(grid.coords.size()) &&
                    patch_maps.h == grid.patch && patch_maps.w == grid.patch,
                "accumulate_votes: one P x P class map per grid position");
    VoteHistogram hist(grid.h, grid.w, K);
    for (size_t pi = 0; pi < grid.coords.size(); ++pi) {
        const auto [oy, ox] = grid.coords[pi];
        for (int y = 0; y < grid.patch; ++y)
            for (int x = 0; x < grid.patch; ++x) {
                const int32_t cls = patch_maps.at(int(pi), y, x);
                require_arg(cls >= 0 && cls < K, "accumulate_votes: class out of range");
                hist.row(oy + y, ox + x)[size_t(cls)] += 1;
            }
    }
    return hist;
}

double pixel_entropy(std::span<const uint32_t> row) {
    require_arg(!row.empty(), "pixel_entropy: empty row");
    uint64_t total = 0;
    int nonzero = 0;
    for (uint32_t c : row) {
        total += c;
        nonzero += c > 0;
    }
    require_arg(total >= 1, "pixel_entropy: pixel received no votes");
    if (nonzero == 1) return 0.0;
    double e = 0;
    for (uint32_t c : row) {
        if (c == 0) continue;
        const double p = double(c) / double(total);
        e -= p * std::log2(p);
    }
    return e;
}

double mean_entropy(const VoteHistogram& hist) {
    InvarianceAccumulator acc(0.0, hist.k);
    acc.add(hist);
    return acc.finalize().mean_e;
}

double disagreement_rate(const VoteHistogram& hist, double theta) {
    InvarianceAccumulator acc(theta, hist.k);
    acc.add(hist);
    return acc.finalize().dis_r;
}

Tensor entropy_map(const VoteHistogram& hist) {
    Tensor m(1, 1, hist.h, hist.w);
    for (int y = 0; y < hist.h; ++y)
        for (int x = 0; x < hist.w; ++x)
            m.at(0, 0, y, x) = float(pixel_entropy(hist.row(y, x)));
    return m;
}

double miou(const ConfusionMatrix& cm) {
    double sum = 0;
    int scored = 0;
    for (int c = 0; c < cm.k; ++c) {
        uint64_t row = 0, col = 0;
        for (int j = 0; j < cm.k; ++j) {
            row += cm.at(c, j);
            col += cm.at(j, c);
        }
        const uint64_t inter = cm.at(c, c);
        const uint64_t uni = row + col - inter;
        if (uni == 0) continue;
        sum += double(inter) / double(uni);
        ++scored;
    }
    return scored == 0 ? 0.0 : sum / scored;
}

void InvarianceReport::validate() const {
    require_arg(n_pixels >= 1, "invariance report: no pixels evaluated");
    const double bound = std::log2(double(k));
    require_dim(mean_e >= 0 && mean_e <= bound + 1e-12,
                "invariance report: meanE outside [0, log2 K]");
    require_dim(dis_r >= 0 && dis_r <= 1, "invariance report: disR outside [0, 1]");
}

std::string InvarianceReport::to_json() const {
    nlohmann::json j;
    j["meanE"] = mean_e;
    j["disR"] = dis_r;
    j["theta"] = theta;
    j["N"] = n_pixels;
    j["K"] = k;
    return j.dump(2) + "\n";
}

void InvarianceAccumulator::add(const VoteHistogram& hist) {
    require_dim(hist.k == k, "invariance accumulator: class count mismatch");
    for (int y = 0; y < hist.h; ++y)
        for (int x = 0; x < hist.w; ++x) {
            const double e = pixel_entropy(hist.row(y, x));
            entropy_sum += e;
            disagree += e > theta ? 1 : 0;
            ++pixels;
        }
}

InvarianceReport InvarianceAccumulator::finalize() const {
    require_arg(pixels >= 1, "invariance accumulator: nothing accumulated");
    InvarianceReport r;
    r.theta = theta;
    r.k = k;
    r.n_pixels = pixels;
    r.mean_e = entropy_sum / double(pixels);
    r.dis_r = double(disagree) / double(pixels);
    r.validate();
    return r;
}

Tensor cyclic_shift(const Tensor& img, int dy, int dx) {
    Tensor out(img.n, img.c, img.h, img.w);
    const auto wrap = [](int t, int extent) {
        const int m = t % extent;
        return m < 0 ? m + extent : m;
    };
    for (int b = 0; b < img.n; ++b)
        for (int c = 0; c < img.c; ++c)
            for (int y = 0; y < img.h; ++y)
                for (int x = 0; x < img.w; ++x)
                    out.at(b, c, y, x) =
                        img.at(b, c, wrap(y - dy, img.h), wrap(x - dx, img.w));
    return out;
}

LabelMap cyclic_shift(const LabelMap& lm, int dy, int dx) {
    LabelMap out(lm.n, lm.h, lm.w);
    const auto wrap = [](int t, int extent) {
        const int m = t % extent;
        return m < 0 ? m + extent : m;
    };
    for (int b = 0; b < lm.n; ++b)
        for (int y = 0; y < lm.h; ++y)
            for (int x = 0; x < lm.w; ++x)
                out.at(b, y, x) = lm.at(b, wrap(y - dy, lm.h), wrap(x - dx, lm.w));
    return out;
}

InvarianceReport cyclic_shift_eval(const PredictFn& predict, const Tensor& image,
                                   const std::vector<std::pair<int, int>>& shifts,
                                   int K, double theta) {
    require_arg(image.n == 1, "cyclic_shift_eval: one image at a time");
    require_arg(!shifts.empty(), "cyclic_shift_eval: no shifts given");
    VoteHistogram hist(image.h, image.w, K);
    for (const auto& [dy, dx] : shifts) {
        const LabelMap pred = predict(cyclic_shift(image, dy, dx));
        require_dim(pred.n == 1 && pred.h == image.h && pred.w == image.w,
                    "cyclic_shift_eval: prediction shape mismatch");
        const LabelMap back = cyclic_shift(pred, -dy, -dx);
        for (int y = 0; y < image.h; ++y)
            for (int x = 0; x < image.w; ++x) {
                const int32_t cls = back.at(0, y, x);
                require_arg(cls >= 0 && cls < K,
                            "cyclic_shift_eval: predicted class out of range");
                hist.row(y, x)[size_t(cls)] += 1;
            }
    }
    InvarianceAccumulator acc(theta, K);
    acc.add(hist);
    return acc.finalize();
}

void write_pgm(const std::string& path, const Tensor& map, double vmax) {
    require_arg(map.n == 1 && map.c == 1, "write_pgm: expected a (1,1,H,W) map");
    require_arg(vmax > 0, "write_pgm: vmax must be positive");
    std::ostringstream os;
    os << "P5\n" << map.w << " " << map.h << "\n255\n";
    for (int y = 0; y < map.h; ++y)
        for (int x = 0; x < map.w; ++x) {
            const double v = double(map.at(0, 0, y, x)) / vmax * 255.0;
            const int px = std::clamp(int(std::lround(v)), 0, 255);
            os.put(char(uint8_t(px)));
        }
    write_file_atomic(path, os.str());
}

}  // namespace pppad
