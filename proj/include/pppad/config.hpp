#pragma once

// Line-oriented experiment configuration: "key = value" with dotted section
// keys, '#' comments, later lines overriding earlier ones. Every key has a
// default below; unknown keys are rejected by name so typos cannot silently
// fall back to defaults.

#include <string>
#include <vector>

#include "pppad/padding.hpp"
#include "pppad/pp_pad.hpp"

namespace pppad {

struct Config {
    struct {
        int height = 64;
        int width = 64;
        int classes = 4;
        int train_count = 200;
        int eval_count = 20;
        double noise = 0.08;
        std::string dir = "data";
    } data;

    struct {
        int in_channels = 3;
        std::vector<int> widths = {16, 16, 16, 16};
    } net;

    struct {
        double base_lr = 0.01;
        double power = 0.9;
        double momentum = 0.9;
        double weight_decay = 0.0001;
        int batch_size = 8;
        int epochs_phase1 = 30;
        int epochs_phase2 = 30;
        int crop = 32;
        bool augment = true;
    } train;

    struct {
        std::string mode = "pp-pad";
        int h_p = 2;
        int w_p = 3;
        int n = 8;
        double init_scale = 0.5;
    } pad;

    struct {
        int patch = 32;
        int stride = 8;
        double theta = 0.0;
        int shifts = 16;
        bool export_entropy = false;
    } eval;

    struct {
        int iters = 20;
        int warmup = 3;
        int batch = 4;
    } bench;

    void set(const std::string& key, const std::string& value);
    void validate() const;

    PadMode pad_mode() const { return pad_mode_from_string(pad.mode); }
    PPPadConfig pp_config() const { return PPPadConfig{pad.h_p, pad.w_p, pad.n}; }

    // Full key list with current values, parseable by parse_config_text.
    std::string dump() const;
};

Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

}  // namespace pppad
