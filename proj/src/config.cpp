#include "pppad/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "pppad/io.hpp"

namespace pppad {

namespace {

std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(uint8_t(s[a]))) ++a;
    while (b > a && std::isspace(uint8_t(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ArgError("config: key '" + key + "' expects an integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t used = 0;
        const double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ArgError("config: key '" + key + "' expects a number, got '" + v + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ArgError("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(int(parse_int(key, trim(item))));
    if (out.empty())
        throw ArgError("config: key '" + key + "' expects a comma-separated list");
    return out;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Entry {
    const char* key;
    std::function<void(Config&, const std::string&)> set;
    std::function<std::string(const Config&)> get;
};

const std::vector<Entry>& registry() {
    static const std::vector<Entry> reg = {
        {"data.height",
         [](Config& c, const std::string& v) { c.data.height = int(parse_int("data.height", v)); },
         [](const Config& c) { return std::to_string(c.data.height); }},
        {"data.width",
         [](Config& c, const std::string& v) { c.data.width = int(parse_int("data.width", v)); },
         [](const Config& c) { return std::to_string(c.data.width); }},
        {"data.classes",
         [](Config& c, const std::string& v) { c.data.classes = int(parse_int("data.classes", v)); },
         [](const Config& c) { return std::to_string(c.data.classes); }},
        {"data.train_count",
         [](Config& c, const std::string& v) { c.data.train_count = int(parse_int("data.train_count", v)); },
         [](const Config& c) { return std::to_string(c.data.train_count); }},
        {"data.eval_count",
         [](Config& c, const std::string& v) { c.data.eval_count = int(parse_int("data.eval_count", v)); },
         [](const Config& c) { return std::to_string(c.data.eval_count); }},
        {"data.noise",
         [](Config& c, const std::string& v) { c.data.noise = parse_double("data.noise", v); },
         [](const Config& c) { return format_double(c.data.noise); }},
        {"data.dir",
         [](Config& c, const std::string& v) { c.data.dir = v; },
         [](const Config& c) { return c.data.dir; }},
        {"net.in_channels",
         [](Config& c, const std::string& v) { c.net.in_channels = int(parse_int("net.in_channels", v)); },
         [](const Config& c) { return std::to_string(c.net.in_channels); }},
        {"net.widths",
         [](Config& c, const std::string& v) { c.net.widths = parse_int_list("net.widths", v); },
         [](const Config& c) {
             std::string s;
             for (size_t i = 0; i < c.net.widths.size(); ++i)
                 s += (i ? "," : "") + std::to_string(c.net.widths[i]);
             return s;
         }},
        {"train.base_lr",
         [](Config& c, const std::string& v) { c.train.base_lr = parse_double("train.base_lr", v); },
         [](const Config& c) { return format_double(c.train.base_lr); }},
        {"train.power",
         [](Config& c, const std::string& v) { c.train.power = parse_double("train.power", v); },
         [](const Config& c) { return format_double(c.train.power); }},
        {"train.momentum",
         [](Config& c, const std::string& v) { c.train.momentum = parse_double("train.momentum", v); },
         [](const Config& c) { return format_double(c.train.momentum); }},
        {"train.weight_decay",
         [](Config& c, const std::string& v) { c.train.weight_decay = parse_double("train.weight_decay", v); },
         [](const Config& c) { return format_double(c.train.weight_decay); }},
        {"train.batch_size",
         [](Config& c, const std::string& v) { c.train.batch_size = int(parse_int("train.batch_size", v)); },
         [](const Config& c) { return std::to_string(c.train.batch_size); }},
        {"train.epochs_phase1",
         [](Config& c, const std::string& v) { c.train.epochs_phase1 = int(parse_int("train.epochs_phase1", v)); },
         [](const Config& c) { return std::to_string(c.train.epochs_phase1); }},
        {"train.epochs_phase2",
         [](Config& c, const std::string& v) { c.train.epochs_phase2 = int(parse_int("train.epochs_phase2", v)); },
         [](const Config& c) { return std::to_string(c.train.epochs_phase2); }},
        {"train.crop",
         [](Config& c, const std::string& v) { c.train.crop = int(parse_int("train.crop", v)); },
         [](const Config& c) { return std::to_string(c.train.crop); }},
        {"train.augment",
         [](Config& c, const std::string& v) { c.train.augment = parse_bool("train.augment", v); },
         [](const Config& c) { return std::string(c.train.augment ? "true" : "false"); }},
        {"pad.mode",
         [](Config& c, const std::string& v) { c.pad.mode = v; },
         [](const Config& c) { return c.pad.mode; }},
        {"pad.h_p",
         [](Config& c, const std::string& v) { c.pad.h_p = int(parse_int("pad.h_p", v)); },
         [](const Config& c) { return std::to_string(c.pad.h_p); }},
        {"pad.w_p",
         [](Config& c, const std::string& v) { c.pad.w_p = int(parse_int("pad.w_p", v)); },
         [](const Config& c) { return std::to_string(c.pad.w_p); }},
        {"pad.n",
         [](Config& c, const std::string& v) { c.pad.n = int(parse_int("pad.n", v)); },
         [](const Config& c) { return std::to_string(c.pad.n); }},
        {"pad.init_scale",
         [](Config& c, const std::string& v) { c.pad.init_scale = parse_double("pad.init_scale", v); },
         [](const Config& c) { return format_double(c.pad.init_scale); }},
        {"eval.patch",
         [](Config& c, const std::string& v) { c.eval.patch = int(parse_int("eval.patch", v)); },
         [](const Config& c) { return std::to_string(c.eval.patch); }},
        {"eval.stride",
         [](Config& c, const std::string& v) { c.eval.stride = int(parse_int("eval.stride", v)); },
         [](const Config& c) { return std::to_string(c.eval.stride); }},
        {"eval.theta",
         [](Config& c, const std::string& v) { c.eval.theta = parse_double("eval.theta", v); },
         [](const Config& c) { return format_double(c.eval.theta); }},
        {"eval.shifts",
         [](Config& c, const std::string& v) { c.eval.shifts = int(parse_int("eval.shifts", v)); },
         [](const Config& c) { return std::to_string(c.eval.shifts); }},
        {"eval.export_entropy",
         [](Config& c, const std::string& v) { c.eval.export_entropy = parse_bool("eval.export_entropy", v); },
         [](const Config& c) { return std::string(c.eval.export_entropy ? "true" : "false"); }},
        {"bench.iters",
         [](Config& c, const std::string& v) { c.bench.iters = int(parse_int("bench.iters", v)); },
         [](const Config& c) { return std::to_string(c.bench.iters); }},
        {"bench.warmup",
         [](Config& c, const std::string& v) { c.bench.warmup = int(parse_int("bench.warmup", v)); },
         [](const Config& c) { return std::to_string(c.bench.warmup); }},
        {"bench.batch",
         [](Config& c, const std::string& v) { c.bench.batch = int(parse_int("bench.batch", v)); },
         [](const Config& c) { return std::to_string(c.bench.batch); }},
    };
    return reg;
}

}  // namespace

void Config::set(const std::string& key, const std::string& value) {
    for (const Entry& e : registry()) {
        if (key == e.key) {
            e.set(*this, value);
            return;
        }
    }
    throw ArgError("config: unknown key '" + key + "'");
}

std::string Config::dump() const {
    std::string out;
    for (const Entry& e : registry()) out += std::string(e.key) + " = " + e.get(*this) + "\n";
    return out;
}

void Config::validate() const {
    require_arg(data.height >= 32 && data.width >= 32, "config: data.height/width must be >= 32");
    require_arg(data.classes >= 2, "config: data.classes must be >= 2");
    require_arg(data.train_count >= 1 && data.eval_count >= 1,
                "config: dataset counts must be >= 1");
    require_arg(data.noise >= 0, "config: data.noise must be >= 0");
    require_arg(net.in_channels >= 1, "config: net.in_channels must be >= 1");
    require_arg(!net.widths.empty(), "config: net.widths must be non-empty");
    for (int w : net.widths) require_arg(w >= 1, "config: net.widths entries must be >= 1");
    require_arg(train.base_lr >= 0, "config: train.base_lr must be >= 0");
    require_arg(train.power >= 0, "config: train.power must be >= 0");
    require_arg(train.momentum >= 0 && train.momentum < 1,
                "config: train.momentum must be in [0, 1)");
    require_arg(train.weight_decay >= 0, "config: train.weight_decay must be >= 0");
    require_arg(train.batch_size >= 1, "config: train.batch_size must be >= 1");
    require_arg(train.epochs_phase1 >= 0 && train.epochs_phase2 >= 0,
                "config: epochs must be >= 0");
    require_arg(train.crop >= 8 && train.crop <= std::min(data.height, data.width),
                "config: train.crop must be in [8, image size]");
    pad_mode_from_string(pad.mode);
    pp_config().validate();
    require_arg(eval.patch >= 1 && eval.patch <= std::min(data.height, data.width),
                "config: eval.patch must fit the image");
    require_arg(eval.stride >= 1 && eval.stride <= eval.patch,
                "config: eval.stride must be in [1, eval.patch]");
    require_arg(eval.theta >= 0, "config: eval.theta must be >= 0");
    require_arg(eval.shifts >= 1, "config: eval.shifts must be >= 1");
    require_arg(bench.iters >= 1 && bench.warmup >= 0 && bench.batch >= 1,
                "config: bench settings out of range");
}

Config parse_config_text(const std::string& text) {
    Config cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ArgError("config line " + std::to_string(lineno) +
                           ": expected 'key = value', got '" + stripped + "'");
        cfg.set(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return cfg;
}

Config load_config(const std::string& path) { return parse_config_text(read_file(path)); }

}  // namespace pppad
