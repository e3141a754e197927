#pragma once

// Binary tensor container and file helpers. Layout: magic "PTNS", version
// u16, rank u16, rank x u32 dims, then row-major IEEE-754 32-bit floats, all
// little-endian. Floats travel as raw bit patterns, so save/load round-trips
// are bit-identical.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pppad/tensor.hpp"

namespace pppad {

inline constexpr uint16_t kTensorFileVersion = 1;

// Write to <path>.tmp then rename, so readers never observe partial files.
void write_file_atomic(const std::string& path, std::string_view bytes);

std::string read_file(const std::string& path);

struct TensorFileData {
    std::vector<uint32_t> dims;
    std::vector<float> data;

    size_t element_count() const {
        size_t n = 1;
        for (uint32_t d : dims) n *= d;
        return n;
    }
};

void save_tensor_file(const std::string& path, std::span<const uint32_t> dims,
                      std::span<const float> data);
TensorFileData load_tensor_file(const std::string& path);

// Rank-4 convenience wrappers for feature maps / kernels-as-blobs.
void save_tensor(const std::string& path, const Tensor& t);
Tensor load_tensor(const std::string& path);

// Images store as rank-3 (C, H, W); labels as rank-2 (H, W) with integer
// class indices carried in the float payload (exact below 2^24).
void save_image(const std::string& path, const Tensor& img);
Tensor load_image(const std::string& path);
void save_labels(const std::string& path, const LabelMap& lm);
LabelMap load_labels(const std::string& path);

}  // namespace pppad
