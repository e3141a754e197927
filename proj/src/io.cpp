#include "pppad/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace pppad {

namespace {

void put_u16(std::string& out, uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8));
}

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
}

struct Reader {
    const uint8_t* p;
    size_t left;
    std::string path;

    void need(size_t n) const {
        if (left < n) throw IoError(path + ": truncated tensor file");
    }
    uint16_t u16() {
        need(2);
        const uint16_t v = uint16_t(p[0]) | uint16_t(p[1]) << 8;
        p += 2;
        left -= 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
        p += 4;
        left -= 4;
        return v;
    }
};

}  // namespace

void write_file_atomic(const std::string& path, std::string_view bytes) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError(tmp + ": cannot open for writing");
        f.write(bytes.data(), std::streamsize(bytes.size()));
        f.flush();
        if (!f) throw IoError(tmp + ": write failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError(path + ": rename failed: " + ec.message());
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError(path + ": cannot open");
    std::string out((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError(path + ": read failed");
    return out;
}

void save_tensor_file(const std::string& path, std::span<const uint32_t> dims,
                      std::span<const float> data) {
    require_arg(!dims.empty() && dims.size() <= 8, "tensor file: rank must be 1..8");
    size_t count = 1;
    for (uint32_t d : dims) {
        require_arg(d >= 1, "tensor file: zero dimension");
        count *= d;
    }
    require_dim(count == data.size(), "tensor file: dims do not match payload");

    std::string out;
    out.reserve(8 + 4 * dims.size() + 4 * data.size());
    out += "PTNS";
    put_u16(out, kTensorFileVersion);
    put_u16(out, uint16_t(dims.size()));
    for (uint32_t d : dims) put_u32(out, d);
    for (float v : data) put_u32(out, std::bit_cast<uint32_t>(v));
    write_file_atomic(path, out);
}

TensorFileData load_tensor_file(const std::string& path) {
    const std::string raw = read_file(path);
    Reader r{reinterpret_cast<const uint8_t*>(raw.data()), raw.size(), path};
    r.need(4);
    if (std::memcmp(r.p, "PTNS", 4) != 0)
        throw IoError(path + ": bad magic, not a tensor file");
    r.p += 4;
    r.left -= 4;
    const uint16_t version = r.u16();
    if (version != kTensorFileVersion)
        throw IoError(path + ": unsupported tensor file version " +
                      std::to_string(version));
    const uint16_t rank = r.u16();
    if (rank < 1 || rank > 8) throw IoError(path + ": bad rank");

    TensorFileData td;
    td.dims.resize(rank);
    size_t count = 1;
    for (uint16_t i = 0; i < rank; ++i) {
        td.dims[i] = r.u32();
        if (td.dims[i] == 0) throw IoError(path + ": zero dimension");
        count *= td.dims[i];
    }
    if (r.left != 4 * count) throw IoError(path + ": payload size mismatch");
    td.data.resize(count);
    for (size_t i = 0; i < count; ++i)
        td.data[i] = std::bit_cast<float>(r.u32());
    return td;
}

void save_tensor(const std::string& path, const Tensor& t) {
    const uint32_t dims[4] = {uint32_t(t.n), uint32_t(t.c), uint32_t(t.h),
                              uint32_t(t.w)};
    save_tensor_file(path, dims, t.data);
}

Tensor load_tensor(const std::string& path) {
    TensorFileData td = load_tensor_file(path);
    if (td.dims.size() != 4) throw IoError(path + ": expected a rank-4 tensor");
    Tensor t(int(td.dims[0]), int(td.dims[1]), int(td.dims[2]), int(td.dims[3]));
    t.data = std::move(td.data);
    return t;
}

void save_image(const std::string& path, const Tensor& img) {
    require_arg(img.n == 1, "save_image: expected a single image");
    const uint32_t dims[3] = {uint32_t(img.c), uint32_t(img.h), uint32_t(img.w)};
    save_tensor_file(path, dims, img.data);
}

Tensor load_image(const std::string& path) {
    TensorFileData td = load_tensor_file(path);
    if (td.dims.size() != 3) throw IoError(path + ": expected a rank-3 image");
    Tensor t(1, int(td.dims[0]), int(td.dims[1]), int(td.dims[2]));
    t.data = std::move(td.data);
    return t;
}

void save_labels(const std::string& path, const LabelMap& lm) {
    require_arg(lm.n == 1, "save_labels: expected a single label plane");
    std::vector<float> payload(lm.v.size());
    for (size_t i = 0; i < lm.v.size(); ++i) payload[i] = float(lm.v[i]);
    const uint32_t dims[2] = {uint32_t(lm.h), uint32_t(lm.w)};
    save_tensor_file(path, dims, payload);
}

LabelMap load_labels(const std::string& path) {
    TensorFileData td = load_tensor_file(path);
    if (td.dims.size() != 2) throw IoError(path + ": expected a rank-2 label plane");
    LabelMap lm(1, int(td.dims[0]), int(td.dims[1]));
    for (size_t i = 0; i < td.data.size(); ++i) {
        const float v = td.data[i];
        if (!(std::rint(v) == v))
            throw IoError(path + ": non-integer label value");
        lm.v[i] = int32_t(v);
    }
    return lm;
}

}  // namespace pppad
