#include "pppad/checkpoint.hpp"

#include <filesystem>
#include <sstream>

#include "pppad/io.hpp"

namespace pppad {

namespace {

std::string trim(std::string s) {
    while (!s.empty() && std::isspace(uint8_t(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(uint8_t(s.back()))) s.pop_back();
    return s;
}

void load_blob(const std::string& path, std::vector<float>& dst,
               const std::array<int, 4>& shape) {
    const TensorFileData td = load_tensor_file(path);
    if (td.dims.size() != 4) throw IoError(path + ": expected rank-4 parameter");
    for (int i = 0; i < 4; ++i)
        if (int(td.dims[size_t(i)]) != shape[size_t(i)])
            throw IoError(path + ": parameter shape mismatch");
    if (td.data.size() != dst.size()) throw IoError(path + ": size mismatch");
    dst.assign(td.data.begin(), td.data.end());
}

}  // namespace

void save_checkpoint(const std::string& dir, SegNet& net, long long epoch,
                     uint64_t rng_state) {
    std::filesystem::create_directories(dir);
    const auto params = net.named_params();

    for (const auto& p : params) {
        const uint32_t dims[4] = {uint32_t(p.shape[0]), uint32_t(p.shape[1]),
                                  uint32_t(p.shape[2]), uint32_t(p.shape[3])};
        save_tensor_file(dir + "/" + p.name + ".ptns", dims, *p.values);
        save_tensor_file(dir + "/" + p.name + ".vel.ptns", dims, *p.velocity);
    }

    std::ostringstream m;
    m << "format = 1\n"
      << "mode = " << pad_mode_name(net.mode) << "\n"
      << "in_channels = " << net.in_channels << "\n"
      << "classes = " << net.classes << "\n";
    m << "widths = ";
    for (size_t i = 0; i < net.widths.size(); ++i)
        m << (i ? "," : "") << net.widths[i];
    m << "\n"
      << "pp.h_p = " << net.pp_cfg.h_p << "\n"
      << "pp.w_p = " << net.pp_cfg.w_p << "\n"
      << "pp.n = " << net.pp_cfg.n << "\n"
      << "epoch = " << epoch << "\n"
      << "rng_state = " << rng_state << "\n"
      << "params:\n";
    for (const auto& p : params) m << p.name << "\n";
    // the manifest lands last, so its presence implies a complete checkpoint
    write_file_atomic(dir + "/manifest.txt", m.str());
}

LoadedCheckpoint load_checkpoint(const std::string& dir) {
    const std::string text = read_file(dir + "/manifest.txt");

    std::string mode_str;
    int in_channels = 0, classes = 0;
    std::vector<int> widths;
    PPPadConfig pp;
    long long epoch = 0;
    uint64_t rng_state = 0;
    std::vector<std::string> names;

    std::stringstream ss(text);
    std::string line;
    bool in_params = false;
    while (std::getline(ss, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line == "params:") {
            in_params = true;
            continue;
        }
        if (in_params) {
            names.push_back(line);
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw IoError(dir + "/manifest.txt: bad line '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "format") {
            if (value != "1")
                throw IoError(dir + ": unsupported checkpoint format " + value);
        } else if (key == "mode") mode_str = value;
        else if (key == "in_channels") in_channels = std::stoi(value);
        else if (key == "classes") classes = std::stoi(value);
        else if (key == "widths") {
            std::stringstream ws(value);
            std::string item;
            while (std::getline(ws, item, ','))
                widths.push_back(std::stoi(trim(item)));
        } else if (key == "pp.h_p") pp.h_p = std::stoi(value);
        else if (key == "pp.w_p") pp.w_p = std::stoi(value);
        else if (key == "pp.n") pp.n = std::stoi(value);
        else if (key == "epoch") epoch = std::stoll(value);
        else if (key == "rng_state") rng_state = std::stoull(value);
        else throw IoError(dir + "/manifest.txt: unknown key '" + key + "'");
    }

    LoadedCheckpoint out;
    Rng dummy(0);
    out.net = SegNet::make(in_channels, widths, classes,
                           pad_mode_from_string(mode_str), pp, dummy);
    out.epoch = epoch;
    out.rng_state = rng_state;

    auto params = out.net.named_params();
    if (params.size() != names.size())
        throw IoError(dir + ": manifest lists " + std::to_string(names.size()) +
                      " parameters, model has " + std::to_string(params.size()));
    for (size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != names[i])
            throw IoError(dir + ": manifest order mismatch at '" + names[i] + "'");
        load_blob(dir + "/" + params[i].name + ".ptns", *params[i].values,
                  params[i].shape);
        load_blob(dir + "/" + params[i].name + ".vel.ptns", *params[i].velocity,
                  params[i].shape);
    }
    return out;
}

}  // namespace pppad
