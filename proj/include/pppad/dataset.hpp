#pragma once

// Synthetic segmentation data: colored discs, rectangles, and triangles on a
// gray background, positions uniform over the image so class identity carries
// no positional signal. Labels are the exact rasterization; images add
// Gaussian noise on top of flat per-class colors.

#include <string>
#include <vector>

#include "pppad/tensor.hpp"

namespace pppad {

struct DatasetSpec {
    int count = 0;
    int height = 0, width = 0;
    int classes = 0;  // including background class 0
    double noise = 0.08;
    uint64_t seed = 0;
};

struct Sample {
    Tensor image;     // (1, 3, H, W), values in [0, 1]
    LabelMap labels;  // (1, H, W)
};

// Flat RGB color for a class index; class 0 is the background gray, the rest
// walk the hue circle in golden-ratio steps so any two classes stay apart.
std::array<float, 3> class_color(int cls);

// Deterministic in (spec.seed, index) alone, so generation order is free.
Sample make_sample(const DatasetSpec& spec, int index);

struct Dataset {
    DatasetSpec spec;
    std::vector<Sample> samples;
};

Dataset make_dataset(const DatasetSpec& spec);

// img_NNNNN.ptns / lab_NNNNN.ptns pairs plus a meta.txt; asserts that every
// class actually occurs somewhere in the emitted labels.
void write_dataset(const std::string& dir, const DatasetSpec& spec);

Dataset load_dataset(const std::string& dir);

}  // namespace pppad
