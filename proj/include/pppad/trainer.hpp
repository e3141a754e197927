#pragma once

// Training loop (shuffled minibatch SGD with the poly schedule) and the
// sliding-window evaluation harness that feeds the invariance metrics.

#include <vector>

#include "pppad/dataset.hpp"
#include "pppad/metrics.hpp"
#include "pppad/segnet.hpp"

namespace pppad {

// base_lr * (1 - epoch/max_epoch)^power
double poly_lr(int epoch, int max_epoch, double base_lr, double power);

struct TrainSettings {
    double base_lr = 0.01;
    double power = 0.9;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    int batch_size = 8;
    int crop = 32;
    bool augment = true;
};

struct PhaseResult {
    std::vector<double> epoch_loss;  // pixel-weighted mean per epoch
    std::vector<double> epoch_lr;
};

// Square crop at (oy, ox) of size s, same window from image and labels.
Sample crop_sample(const Sample& smp, int oy, int ox, int s);

// Random square crop, coin-flip horizontal mirror, quarter-turn rotation;
// image and labels move together.
Sample augment_sample(const Sample& smp, int crop, Rng& rng);

// One training phase: `epochs` passes of minibatch SGD under the poly
// schedule (restarted at this phase's epoch 0). Throws on non-finite loss.
PhaseResult train_phase(SegNet& net, const Dataset& ds, const TrainSettings& ts,
                        int epochs, uint64_t seed);

struct EvalResult {
    InvarianceReport report;
    double miou_value = 0;
    ConfusionMatrix confusion;
    std::vector<Tensor> entropy_maps;  // one (1,1,H,W) map per image if kept
};

// Slide P x P windows with the given stride over every image, vote per pixel
// across overlapping predictions, and score every patch pixel against ground
// truth in one global confusion matrix. The report is bounds-audited.
EvalResult evaluate_dataset(const SegNet& net, const Dataset& ds, int patch,
                            int stride, double theta,
                            bool keep_entropy_maps = false);

}  // namespace pppad
