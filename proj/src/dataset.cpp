#include "pppad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "pppad/io.hpp"

namespace pppad {

namespace {

std::array<float, 3> hsv_to_rgb(double h, double s, double v) {
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    switch (int(hp) % 6) {
        case 0: r = c; g = x; break;
        case 1: r = x; g = c; break;
        case 2: g = c; b = x; break;
        case 3: g = x; b = c; break;
        case 4: r = x; b = c; break;
        default: r = c; b = x; break;
    }
    const double m = v - c;
    return {float(r + m), float(g + m), float(b + m)};
}

struct Shape {
    int kind = 0;  // 0 disc, 1 rectangle, 2 triangle
    int cls = 0;
    double cy = 0, cx = 0;
    double a = 0, b = 0;     // radius / half-extents
    double verts[3][2] = {};  // triangle corners

    bool contains(double y, double x) const {
        switch (kind) {
            case 0: {
                const double dy = y - cy, dx = x - cx;
                return dy * dy + dx * dx <= a * a;
            }
            case 1:
                return std::abs(y - cy) <= a && std::abs(x - cx) <= b;
            default: {
                for (int i = 0; i < 3; ++i) {
                    const double* p = verts[i];
                    const double* q = verts[(i + 1) % 3];
                    const double cross =
                        (q[0] - p[0]) * (x - p[1]) - (q[1] - p[1]) * (y - p[0]);
                    if (cross < 0) return false;
                }
                return true;
            }
        }
    }
};

Shape draw_shape(Rng& rng, const DatasetSpec& spec, int cls) {
    const double dim = std::min(spec.height, spec.width);
    Shape s;
    s.cls = cls;
    s.kind = (cls - 1) % 3;
    s.cy = rng.uniform(0.0, double(spec.height));
    s.cx = rng.uniform(0.0, double(spec.width));
    switch (s.kind) {
        case 0:
            s.a = rng.uniform(0.12, 0.25) * dim;
            break;
        case 1:
            s.a = rng.uniform(0.10, 0.22) * dim;
            s.b = rng.uniform(0.10, 0.22) * dim;
            break;
        default: {
            const double r = rng.uniform(0.14, 0.28) * dim;
            const double th0 = rng.uniform(0.0, 6.283185307179586);
            for (int i = 0; i < 3; ++i) {
                const double th = th0 + i * 2.0943951023931953;
                s.verts[i][0] = s.cy + r * std::sin(th);
                s.verts[i][1] = s.cx + r * std::cos(th);
            }
            // order counter-clockwise so every half-plane test has one sign
            const double area =
                (s.verts[1][0] - s.verts[0][0]) * (s.verts[2][1] - s.verts[0][1]) -
                (s.verts[1][1] - s.verts[0][1]) * (s.verts[2][0] - s.verts[0][0]);
            if (area < 0) std::swap(s.verts[1][0], s.verts[2][0]),
                std::swap(s.verts[1][1], s.verts[2][1]);
            break;
        }
    }
    return s;
}

struct MetaEntry {
    std::string key, value;
};

std::vector<MetaEntry> parse_meta(const std::string& text) {
    std::vector<MetaEntry> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        const size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && std::isspace(uint8_t(s.front()))) s.erase(s.begin());
            while (!s.empty() && std::isspace(uint8_t(s.back()))) s.pop_back();
            return s;
        };
        out.push_back({trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
    }
    return out;
}

std::string sample_name(const char* prefix, int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%05d.ptns", prefix, index);
    return buf;
}

}  // namespace

std::array<float, 3> class_color(int cls) {
    require_arg(cls >= 0, "class_color: negative class");
    if (cls == 0) return {0.25f, 0.25f, 0.25f};
    const double hue = std::fmod(0.618033988749895 * cls, 1.0);
    return hsv_to_rgb(hue, 0.65, 0.9);
}

Sample make_sample(const DatasetSpec& spec, int index) {
    require_arg(spec.classes >= 2 && spec.classes <= 64,
                "dataset: classes must be in [2, 64]");
    require_arg(spec.height >= 32 && spec.width >= 32,
                "dataset: images must be at least 32x32");
    require_arg(index >= 0 && index < spec.count, "dataset: index out of range");

    Rng rng(Rng::mix(spec.seed, uint64_t(index)));
    const int kinds = spec.classes - 1;

    Sample smp;
    smp.image = Tensor(1, 3, spec.height, spec.width);
    smp.labels = LabelMap(1, spec.height, spec.width);

    const int shape_count = 3 + int(rng.below(3));
    std::vector<Shape> shapes;
    shapes.reserve(size_t(shape_count));
    for (int s = 0; s < shape_count; ++s) {
        // cycling the first draw guarantees every class appears often
        const int cls = s == 0 ? 1 + index % kinds : 1 + int(rng.below(uint32_t(kinds)));
        shapes.push_back(draw_shape(rng, spec, cls));
    }

    for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x) {
            int cls = 0;
            for (const Shape& sh : shapes)
                if (sh.contains(y + 0.5, x + 0.5)) cls = sh.cls;
            smp.labels.at(0, y, x) = cls;
            const auto rgb = class_color(cls);
            for (int ch = 0; ch < 3; ++ch) smp.image.at(0, ch, y, x) = rgb[size_t(ch)];
        }

    if (spec.noise > 0) {
        for (float& v : smp.image.data) {
            v += float(spec.noise * rng.gauss());
            v = std::clamp(v, 0.0f, 1.0f);
        }
    }
    return smp;
}

Dataset make_dataset(const DatasetSpec& spec) {
    require_arg(spec.count >= 1, "dataset: count must be >= 1");
    Dataset ds;
    ds.spec = spec;
    ds.samples.reserve(size_t(spec.count));
    for (int i = 0; i < spec.count; ++i) ds.samples.push_back(make_sample(spec, i));
    return ds;
}

void write_dataset(const std::string& dir, const DatasetSpec& spec) {
    require_arg(spec.count >= 1, "dataset: count must be >= 1");
    std::filesystem::create_directories(dir);

    std::vector<long long> class_pixels(size_t(spec.classes), 0);
    for (int i = 0; i < spec.count; ++i) {
        const Sample smp = make_sample(spec, i);
        for (int32_t lab : smp.labels.v) ++class_pixels[size_t(lab)];
        save_image(dir + "/" + sample_name("img", i), smp.image);
        save_labels(dir + "/" + sample_name("lab", i), smp.labels);
    }
    for (int c = 0; c < spec.classes; ++c)
        require_arg(class_pixels[size_t(c)] > 0,
                    "dataset: class " + std::to_string(c) +
                        " never occurs; enlarge count or image size");

    std::ostringstream meta;
    meta << "count = " << spec.count << "\n"
         << "height = " << spec.height << "\n"
         << "width = " << spec.width << "\n"
         << "classes = " << spec.classes << "\n"
         << "noise = " << spec.noise << "\n"
         << "seed = " << spec.seed << "\n";
    write_file_atomic(dir + "/meta.txt", meta.str());
}

Dataset load_dataset(const std::string& dir) {
    const std::string meta_text = read_file(dir + "/meta.txt");
    DatasetSpec spec;
    for (const auto& [key, value] : parse_meta(meta_text)) {
        if (key == "count") spec.count = std::stoi(value);
        else if (key == "height") spec.height = std::stoi(value);
        else if (key == "width") spec.width = std::stoi(value);
        else if (key == "classes") spec.classes = std::stoi(value);
        else if (key == "noise") spec.noise = std::stod(value);
        else if (key == "seed") spec.seed = std::stoull(value);
        else throw IoError(dir + "/meta.txt: unknown key '" + key + "'");
    }
    require_arg(spec.count >= 1, "dataset: bad meta count");

    Dataset ds;
    ds.spec = spec;
    ds.samples.reserve(size_t(spec.count));
    for (int i = 0; i < spec.count; ++i) {
        Sample smp;
        smp.image = load_image(dir + "/" + sample_name("img", i));
        smp.labels = load_labels(dir + "/" + sample_name("lab", i));
        require_dim(smp.image.h == spec.height && smp.image.w == spec.width,
                    "dataset: image size does not match meta");
        for (int32_t lab : smp.labels.v)
            require_arg(lab >= 0 && lab < spec.classes, "dataset: label out of range");
        ds.samples.push_back(std::move(smp));
    }
    return ds;
}

}  // namespace pppad
