// Experiment driver: dataset generation, two-phase training, sliding-window
// invariance/accuracy evaluation, gradient checks, parameter audits, and
// timing benchmarks. Exit codes: 0 ok, 1 usage/config error, 2 runtime
// failure, 3 gradient-check failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pppad/checkpoint.hpp"
#include "pppad/config.hpp"
#include "pppad/dataset.hpp"
#include "pppad/gradcheck.hpp"
#include "pppad/io.hpp"
#include "pppad/parallel.hpp"
#include "pppad/reference.hpp"
#include "pppad/trainer.hpp"

namespace {

using namespace pppad;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "out";
    uint64_t seed = 42;
    bool deterministic = false;
    double theta = -1;  // < 0 means "use config"
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

Config resolve_config(const GlobalOpts& g) {
    Config cfg = g.config_path.empty() ? Config{} : load_config(g.config_path);
    if (g.theta >= 0) cfg.eval.theta = g.theta;
    cfg.validate();
    return cfg;
}

TrainSettings train_settings(const Config& cfg) {
    TrainSettings ts;
    ts.base_lr = cfg.train.base_lr;
    ts.power = cfg.train.power;
    ts.momentum = cfg.train.momentum;
    ts.weight_decay = cfg.train.weight_decay;
    ts.batch_size = cfg.train.batch_size;
    ts.crop = cfg.train.crop;
    ts.augment = cfg.train.augment;
    return ts;
}

DatasetSpec dataset_spec(const Config& cfg, int count, uint64_t seed) {
    DatasetSpec spec;
    spec.count = count;
    spec.height = cfg.data.height;
    spec.width = cfg.data.width;
    spec.classes = cfg.data.classes;
    spec.noise = cfg.data.noise;
    spec.seed = seed;
    return spec;
}

int cmd_gen_data(const GlobalOpts& g) {
    const Config cfg = resolve_config(g);
    const auto train = dataset_spec(cfg, cfg.data.train_count, Rng::mix(g.seed, 1));
    const auto eval = dataset_spec(cfg, cfg.data.eval_count, Rng::mix(g.seed, 2));
    write_dataset(cfg.data.dir + "/train", train);
    write_dataset(cfg.data.dir + "/eval", eval);
    std::cout << "wrote " << train.count << " train + " << eval.count
              << " eval images (" << cfg.data.height << "x" << cfg.data.width
              << ", K=" << cfg.data.classes << ") under " << cfg.data.dir << "\n";
    return 0;
}

int cmd_train(const GlobalOpts& g) {
    const Config cfg = resolve_config(g);
    const Dataset ds = load_dataset(cfg.data.dir + "/train");
    require_arg(ds.spec.classes == cfg.data.classes,
                "config: data.classes does not match the generated dataset");
    require_arg(ds.spec.height == cfg.data.height && ds.spec.width == cfg.data.width,
                "config: data.height/width do not match the generated dataset");

    const PadMode target = cfg.pad_mode();
    const std::string mode_name = pad_mode_name(target);
    Rng init_rng(Rng::mix(g.seed, 0x6e6574));
    SegNet net = SegNet::make(cfg.net.in_channels, cfg.net.widths, cfg.data.classes,
                              PadMode::Zero, cfg.pp_config(), init_rng);

    const TrainSettings ts = train_settings(cfg);
    const auto t0 = std::chrono::steady_clock::now();
    const PhaseResult r1 =
        train_phase(net, ds, ts, cfg.train.epochs_phase1, Rng::mix(g.seed, 0x7031));

    Rng swap_rng(Rng::mix(g.seed, 0x7070));
    net.set_mode(target, swap_rng, cfg.pad.init_scale);
    const PhaseResult r2 =
        train_phase(net, ds, ts, cfg.train.epochs_phase2, Rng::mix(g.seed, 0x7032));
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    std::filesystem::create_directories(g.out_dir);
    save_checkpoint(g.out_dir + "/checkpoint-" + mode_name, net,
                    cfg.train.epochs_phase1 + cfg.train.epochs_phase2, g.seed);

    std::string csv = "phase,epoch,lr,loss\n";
    for (size_t e = 0; e < r1.epoch_loss.size(); ++e)
        csv += "1," + std::to_string(e) + "," + fmt(r1.epoch_lr[e]) + "," +
               fmt(r1.epoch_loss[e]) + "\n";
    for (size_t e = 0; e < r2.epoch_loss.size(); ++e)
        csv += "2," + std::to_string(e) + "," + fmt(r2.epoch_lr[e]) + "," +
               fmt(r2.epoch_loss[e]) + "\n";
    write_file_atomic(g.out_dir + "/train-" + mode_name + ".csv", csv);
    write_file_atomic(g.out_dir + "/config-" + mode_name + ".txt", cfg.dump());

    std::cout << "trained " << mode_name << " (" << cfg.train.epochs_phase1 << "+"
              << cfg.train.epochs_phase2 << " epochs) in " << std::fixed
              << std::setprecision(1) << dt.count() << "s";
    if (!r1.epoch_loss.empty())
        std::cout << "; phase1 loss " << r1.epoch_loss.front() << " -> "
                  << r1.epoch_loss.back();
    if (!r2.epoch_loss.empty())
        std::cout << "; phase2 loss " << r2.epoch_loss.front() << " -> "
                  << r2.epoch_loss.back();
    std::cout << "\n";
    return 0;
}

int cmd_eval(const GlobalOpts& g, std::vector<std::string> modes,
             std::string checkpoint_dir, bool cyclic) {
    const Config cfg = resolve_config(g);
    const Dataset ds = load_dataset(cfg.data.dir + "/eval");
    if (modes.empty()) modes.push_back(cfg.pad.mode);
    require_arg(modes.size() == 1 || checkpoint_dir.empty(),
                "eval: --checkpoint only applies to a single mode");

    std::string csv = "mode,mIoU,meanE,disR\n";
    for (const std::string& m : modes) {
        pad_mode_from_string(m);
        const std::string dir =
            checkpoint_dir.empty() ? g.out_dir + "/checkpoint-" + m : checkpoint_dir;
        LoadedCheckpoint ck = load_checkpoint(dir);
        require_arg(pad_mode_name(ck.net.mode) == m,
                    "eval: checkpoint at " + dir + " holds mode " +
                        pad_mode_name(ck.net.mode) + ", not " + m);

        const EvalResult er =
            evaluate_dataset(ck.net, ds, cfg.eval.patch, cfg.eval.stride,
                             cfg.eval.theta, cfg.eval.export_entropy);

        nlohmann::json j;
        j["mode"] = m;
        j["mIoU"] = er.miou_value;
        j["meanE"] = er.report.mean_e;
        j["disR"] = er.report.dis_r;
        j["theta"] = er.report.theta;
        j["N"] = er.report.n_pixels;
        j["K"] = er.report.k;
        write_file_atomic(g.out_dir + "/report-" + m + ".json", j.dump(2) + "\n");
        csv += m + "," + fmt(er.miou_value) + "," + fmt(er.report.mean_e) + "," +
               fmt(er.report.dis_r) + "\n";

        if (cfg.eval.export_entropy) {
            const double vmax = std::log2(double(er.report.k));
            for (size_t i = 0; i < er.entropy_maps.size(); ++i) {
                char name[64];
                std::snprintf(name, sizeof name, "/entropy-%s-%03zu.pgm", m.c_str(), i);
                write_pgm(g.out_dir + name, er.entropy_maps[i],
                          vmax > 0 ? vmax : 1.0);
            }
        }

        if (cyclic) {
            Rng srng(Rng::mix(g.seed, 0x736866));
            std::vector<std::pair<int, int>> shifts;
            for (int s = 0; s < cfg.eval.shifts; ++s)
                shifts.emplace_back(int(srng.below(uint32_t(ds.spec.height))),
                                    int(srng.below(uint32_t(ds.spec.width))));
            InvarianceAccumulator acc(cfg.eval.theta, ds.spec.classes);
            for (const Sample& smp : ds.samples) {
                const auto rep = cyclic_shift_eval(
                    [&](const Tensor& img) { return ck.net.predict(img); },
                    smp.image, shifts, ds.spec.classes, cfg.eval.theta);
                acc.entropy_sum += rep.mean_e * double(rep.n_pixels);
                acc.disagree += (long long)std::llround(rep.dis_r * double(rep.n_pixels));
                acc.pixels += rep.n_pixels;
            }
            const InvarianceReport pooled = acc.finalize();
            nlohmann::json cj;
            cj["mode"] = m;
            cj["meanE"] = pooled.mean_e;
            cj["disR"] = pooled.dis_r;
            cj["theta"] = pooled.theta;
            cj["N"] = pooled.n_pixels;
            cj["K"] = pooled.k;
            write_file_atomic(g.out_dir + "/report-cyclic-" + m + ".json",
                              cj.dump(2) + "\n");
        }

        std::cout << m << ": mIoU=" << fmt(er.miou_value)
                  << " meanE=" << fmt(er.report.mean_e)
                  << " disR=" << fmt(er.report.dis_r) << " N=" << er.report.n_pixels
                  << "\n";
    }
    write_file_atomic(g.out_dir + "/comparison.csv", csv);
    return 0;
}

int cmd_gradcheck(const GlobalOpts& g, int instances) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto results = run_gradcheck_suite(g.seed, instances);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    bool all_pass = true;
    std::printf("%-24s %10s %14s  %s\n", "op", "instances", "max_rel_err", "status");
    for (const auto& r : results) {
        std::printf("%-24s %10d %14.3e  %s\n", r.op.c_str(), r.instances,
                    r.max_rel_err, r.pass ? "pass" : "FAIL");
        all_pass = all_pass && r.pass;
    }
    std::printf("gradcheck %s in %.2fs (eps=%g, tol=%g)\n",
                all_pass ? "passed" : "FAILED", dt.count(), kGradEps, kGradTol);
    return all_pass ? 0 : 3;
}

int cmd_params(int h_p, int w_p, int n, int channels) {
    PPPadConfig cfg{h_p, w_p, n};
    cfg.validate();
    const long long shared = param_count(cfg, channels, false);
    const long long naive = param_count(cfg, channels, true);
    const long long savings = naive - shared;

    auto pred = EdgePredictorT<float>::make(cfg);
    const long long stored = (long long)pred.weight_count();

    std::printf("h_p=%d w_p=%d n=%d C=%d\n", h_p, w_p, n, channels);
    std::printf("shared  = %lld\n", shared);
    std::printf("naive   = %lld\n", naive);
    std::printf("savings = %lld\n", savings);

    bool ok = stored == shared;
    std::printf("structural audit: stored=%lld %s\n", stored,
                ok ? "(matches shared)" : "(MISMATCH)");
    if (h_p == 2 && w_p == 3) {
        const long long identity = 7LL * n * (channels - 1);
        const bool id_ok = savings == identity;
        std::printf("savings identity 7n(C-1) = %lld %s\n", identity,
                    id_ok ? "(holds)" : "(VIOLATED)");
        ok = ok && id_ok;
    }
    return ok ? 0 : 2;
}

int cmd_bench(const GlobalOpts& g) {
    const Config cfg = resolve_config(g);
    const int crop = cfg.train.crop, bsz = cfg.bench.batch;

    DatasetSpec spec = dataset_spec(cfg, std::max(bsz, 2), Rng::mix(g.seed, 0xbe));
    const Dataset ds = make_dataset(spec);

    const std::vector<std::string> modes = {"zero",    "reflect", "replicate",
                                            "circular", "partial", "pp-pad"};
    std::string csv = "mode,train_iter_s,infer_image_s,train_vs_zero,infer_vs_zero\n";
    double zero_train = 0, zero_infer = 0;

    for (const std::string& m : modes) {
        const PadMode mode = pad_mode_from_string(m);
        Rng rng(Rng::mix(g.seed, 0x62656e63));
        SegNet net = SegNet::make(cfg.net.in_channels, cfg.net.widths,
                                  cfg.data.classes, mode, cfg.pp_config(), rng, 0.01);

        Tensor batch(bsz, cfg.net.in_channels, crop, crop);
        LabelMap labels(bsz, crop, crop);
        Rng brng(Rng::mix(g.seed, 0x6261));
        fill_uniform(batch, brng, 0.0, 1.0);
        for (int32_t& lab : labels.v)
            lab = int32_t(brng.below(uint32_t(cfg.data.classes)));

        const TrainSettings ts = train_settings(cfg);
        std::vector<double> train_times, infer_times;
        for (int it = 0; it < cfg.bench.warmup + cfg.bench.iters; ++it) {
            const auto t0 = std::chrono::steady_clock::now();
            GradTape tape;
            const auto vin = tape.leaf(batch);
            const auto vlog = net.forward(tape, vin);
            const auto xent = softmax_cross_entropy(tape.value(vlog), labels);
            net.zero_grad();
            tape.backward(vlog, xent.grad);
            net.step(0.001f, float(ts.momentum), float(ts.weight_decay));
            const std::chrono::duration<double> d =
                std::chrono::steady_clock::now() - t0;
            if (it >= cfg.bench.warmup) train_times.push_back(d.count());
        }
        const Tensor one_image = ds.samples[0].image;
        for (int it = 0; it < cfg.bench.warmup + cfg.bench.iters; ++it) {
            const auto t0 = std::chrono::steady_clock::now();
            volatile float sink = net.infer(one_image).data[0];
            (void)sink;
            const std::chrono::duration<double> d =
                std::chrono::steady_clock::now() - t0;
            if (it >= cfg.bench.warmup) infer_times.push_back(d.count());
        }
        auto median = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            const size_t n = v.size();
            return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        };
        const double tm = median(train_times), im = median(infer_times);
        if (m == "zero") {
            zero_train = tm;
            zero_infer = im;
        }
        csv += m + "," + fmt(tm) + "," + fmt(im) + "," + fmt(tm / zero_train) + "," +
               fmt(im / zero_infer) + "\n";
        std::printf("%-10s train %.4fs/iter (%.2fx zero)  infer %.4fs/img (%.2fx zero)\n",
                    m.c_str(), tm, tm / zero_train, im, im / zero_infer);
    }
    std::filesystem::create_directories(g.out_dir);
    write_file_atomic(g.out_dir + "/bench.csv", csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"padding experiment driver"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "config file (key = value lines)");
    app.add_option("--seed", g.seed, "base seed for all randomness");
    app.add_flag("--deterministic", g.deterministic,
                 "single-threaded execution (results are identical either way)");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--theta", g.theta, "disagreement threshold override");

    auto* gen = app.add_subcommand("gen-data", "generate the synthetic dataset");
    auto* train = app.add_subcommand("train", "two-phase training run");
    auto* eval = app.add_subcommand("eval", "sliding-window evaluation");
    std::vector<std::string> eval_modes;
    std::string eval_checkpoint;
    bool eval_cyclic = false;
    eval->add_option("--modes", eval_modes, "padding modes to evaluate")
        ->delimiter(',');
    eval->add_option("--checkpoint", eval_checkpoint, "explicit checkpoint dir");
    eval->add_flag("--cyclic", eval_cyclic, "also run the cyclic-shift oracle");

    auto* gc = app.add_subcommand("gradcheck", "finite-difference gradient checks");
    int gc_instances = 20;
    gc->add_option("--instances", gc_instances, "random instances per op")
        ->check(CLI::PositiveNumber);

    auto* params = app.add_subcommand("params", "parameter count audit");
    int p_hp = 2, p_wp = 3, p_n = 8, p_c = 64;
    params->add_option("--h_p", p_hp);
    params->add_option("--w_p", p_wp);
    params->add_option("--n", p_n);
    params->add_option("--channels", p_c);

    auto* bench = app.add_subcommand("bench", "timing per padding mode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (g.deterministic) parallel::force_single_thread();
        if (gen->parsed()) return cmd_gen_data(g);
        if (train->parsed()) return cmd_train(g);
        if (eval->parsed()) return cmd_eval(g, eval_modes, eval_checkpoint, eval_cyclic);
        if (gc->parsed()) return cmd_gradcheck(g, gc_instances);
        if (params->parsed()) return cmd_params(p_hp, p_wp, p_n, p_c);
        if (bench->parsed()) return cmd_bench(g);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const ArgError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
