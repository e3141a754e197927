#pragma once

// Checkpoint directory: manifest.txt describing the architecture, epoch, and
// RNG state, plus one tensor file per parameter and one per momentum buffer.
// Loading reproduces the saved training state bit for bit.

#include <string>

#include "pppad/segnet.hpp"

namespace pppad {

void save_checkpoint(const std::string& dir, SegNet& net, long long epoch,
                     uint64_t rng_state);

struct LoadedCheckpoint {
    SegNet net;
    long long epoch = 0;
    uint64_t rng_state = 0;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

}  // namespace pppad
