#pragma once

// Translation-invariance evaluation: sliding-window patch grids, per-pixel
// vote histograms from overlapping patch predictions, entropy statistics
// (meanE, disR), mIoU from a global confusion matrix, and an exact
// cyclic-shift oracle for circularly padded models.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pppad/tensor.hpp"

namespace pppad {

struct PatchGrid {
    int h = 0, w = 0;
    int patch = 0, stride = 0;
    std::vector<std::pair<int, int>> coords;  // (y, x), row-major
};

// Positions {0, S, 2S, ...}; the first position that would overshoot is
// clamped to H-P (resp. W-P) so the windows stay inside and reach the border.
PatchGrid build_patch_grid(int H, int W, int P, int S);

// Per-pixel class vote counts, rows indexed (y, x), K counts per row.
struct VoteHistogram {
    int h = 0, w = 0, k = 0;
    std::vector<uint32_t> counts;

    VoteHistogram() = default;
    VoteHistogram(int h_, int w_, int k_) : h(h_), w(w_), k(k_) {
        require_arg(h_ >= 1 && w_ >= 1 && k_ >= 1, "histogram dims must be >= 1");
        counts.assign(size_t(h_) * w_ * k_, 0);
    }

    std::span<uint32_t> row(int y, int x) {
        return {counts.data() + (size_t(y) * w + x) * k, size_t(k)};
    }
    std::span<const uint32_t> row(int y, int x) const {
        return {counts.data() + (size_t(y) * w + x) * k, size_t(k)};
    }
};

// One P×P class map per grid position, stacked along the batch axis of
// `patch_maps` in the grid's coordinate order.
VoteHistogram accumulate_votes(const PatchGrid& grid, const LabelMap& patch_maps,
                               int K);

// Base-2 entropy of one vote row; 0*log 0 terms drop out. Empty rows are an
// error: every evaluated pixel must be covered by at least one patch.
double pixel_entropy(std::span<const uint32_t> row);

double mean_entropy(const VoteHistogram& hist);

// Fraction of pixels whose vote entropy strictly exceeds theta.
double disagreement_rate(const VoteHistogram& hist, double theta = 0.0);

// Per-pixel entropies as a (1,1,H,W) map, for graymap export.
Tensor entropy_map(const VoteHistogram& hist);

struct ConfusionMatrix {
    int k = 0;
    std::vector<uint64_t> counts;  // (gt, pred) row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int k_) : k(k_) {
        require_arg(k_ >= 1, "confusion matrix needs k >= 1");
        counts.assign(size_t(k_) * k_, 0);
    }

    uint64_t& at(int gt, int pred) { return counts[size_t(gt) * k + pred]; }
    uint64_t at(int gt, int pred) const { return counts[size_t(gt) * k + pred]; }

    void add(int gt, int pred, uint64_t n = 1) {
        require_arg(gt >= 0 && gt < k && pred >= 0 && pred < k,
                    "confusion matrix: class out of range");
        at(gt, pred) += n;
    }

    void merge(const ConfusionMatrix& o) {
        require_dim(k == o.k, "confusion matrix: size mismatch");
        for (size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
    }

    uint64_t total() const {
        uint64_t t = 0;
        for (uint64_t c : counts) t += c;
        return t;
    }
};

// Mean over classes with nonzero union of diag / (row + col - diag);
// an all-zero matrix scores 0.
double miou(const ConfusionMatrix& cm);

struct InvarianceReport {
    double mean_e = 0;
    double dis_r = 0;
    double theta = 0;
    long long n_pixels = 0;
    int k = 0;

    // Hard bounds check; runs on every report this library produces.
    void validate() const;
    std::string to_json() const;
};

// Pools entropy over all pixels of all evaluated images, so the mean's
// denominator is the joint pixel count.
struct InvarianceAccumulator {
    double theta = 0;
    int k = 0;
    double entropy_sum = 0;
    long long disagree = 0;
    long long pixels = 0;

    InvarianceAccumulator(double theta_, int k_) : theta(theta_), k(k_) {
        require_arg(theta_ >= 0, "theta must be >= 0");
        require_arg(k_ >= 1, "k must be >= 1");
    }

    void add(const VoteHistogram& hist);
    InvarianceReport finalize() const;
};

// Torus shift: out(y, x) = in((y - dy) mod H, (x - dx) mod W).
Tensor cyclic_shift(const Tensor& img, int dy, int dx);
LabelMap cyclic_shift(const LabelMap& lm, int dy, int dx);

// Full-image class prediction for a (1, C, H, W) input, returned as (1, H, W).
using PredictFn = std::function<LabelMap(const Tensor&)>;

// Predict the image once per shift, shift each class map back, and vote.
// With circular padding everywhere the votes agree exactly and the report
// comes back all zero.
InvarianceReport cyclic_shift_eval(const PredictFn& predict, const Tensor& image,
                                   const std::vector<std::pair<int, int>>& shifts,
                                   int K, double theta = 0.0);

// Binary portable graymap, values scaled by 255/vmax and clamped.
void write_pgm(const std::string& path, const Tensor& map, double vmax);

}  // namespace pppad
