// tinycnn: train, run and inspect the two-conv-layer image classifier.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tinycnn/config.hpp"
#include "tinycnn/dataset.hpp"
#include "tinycnn/error.hpp"
#include "tinycnn/forward.hpp"
#include "tinycnn/numcore.hpp"
#include "tinycnn/oracle.hpp"
#include "tinycnn/synthetic.hpp"
#include "tinycnn/trainer.hpp"
#include "tinycnn/weightstore.hpp"

namespace fs = std::filesystem;
using namespace tinycnn;

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfig = 2,
    kDataset = 3,
    kNumeric = 4,
    kIo = 5,
};

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_sigint(int) { g_interrupted = 1; }

struct Flags {
    std::string data;
    std::string weights;
    std::string config;
    std::string image;
    std::string output;
    std::string report;
    std::string split = "validation";
    std::string labels;
    std::optional<int> epochs;
    std::optional<int> batch;
    std::optional<double> lr;
    std::optional<int> input_size;
    std::optional<int> val;
    std::optional<std::uint64_t> seed;
    bool no_shuffle = false;
    bool no_baked = false;
    int frames = 10;
    int draws = 20;
    int per_class = 30;
};

Settings build_settings(const Flags& f) {
    Settings s;
    if (!f.config.empty()) s = load_settings(f.config, s);
    if (!f.labels.empty()) apply_setting(s, "labels", f.labels);
    if (f.input_size) s.net.input_size = *f.input_size;
    if (f.epochs) s.train.epochs = *f.epochs;
    if (f.batch) s.train.batch_size = *f.batch;
    if (f.lr) s.train.learning_rate = *f.lr;
    if (f.val) s.train.validation_images = *f.val;
    if (f.seed) s.train.shuffle_seed = *f.seed;
    if (f.no_shuffle) s.train.shuffle_enabled = false;
    s.validate();
    return s;
}

std::optional<fs::path> binary_path(const Flags& f) {
    if (!f.weights.empty()) return fs::path(f.weights);
    if (!f.data.empty()) return weights_dir(f.data) / kBinaryFileName;
    return std::nullopt;
}

ResolvedWeights resolve(const Flags& f, const Settings& s, const NetDims& d) {
    std::optional<WeightSet> baked;
    if (!f.no_baked) baked = baked_weights(d);
    return resolve_weights(binary_path(f), baked, d, s.train.shuffle_seed);
}

fs::path require_data(const Flags& f) {
    if (f.data.empty()) throw ConfigError("--data is required for this command");
    return f.data;
}

void print_eval(const EvalResult& r, const ClassMap& classes) {
    std::printf("Images: %zu  Correct: %zu\n", r.images, r.correct);
    std::printf("Confusion (rows = true, cols = predicted):\n");
    for (std::size_t t = 0; t < r.confusion.size(); ++t) {
        std::printf("  %-12s", classes.labels[t].c_str());
        for (auto n : r.confusion[t]) std::printf(" %5zu", n);
        std::printf("\n");
    }
}

int cmd_train(const Flags& f) {
    const Settings s = build_settings(f);
    const NetDims d = derive_dims(s.net);
    const fs::path root = require_data(f);
    const DatasetIndex index = scan(root, s.classes, s.train.validation_images);

    auto resolved = resolve(f, s, d);
    std::cout << origin_banner(resolved.origin) << " (" << resolved.source << ")\n";

    ImageLoader loader(s.net.input_size);
    const auto train_set = load_samples(train_items(index), loader);
    const auto val_set = load_samples(validation_items(index), loader);
    std::cout << "Training images: " << train_set.size() << "  Validation images: " << val_set.size() << "\n";

    const fs::path bin = binary_path(f).value();
    const fs::path out_dir = bin.has_parent_path() ? bin.parent_path() : fs::path(".");
    fs::create_directories(out_dir);
    const fs::path report_path = f.report.empty() ? out_dir / "train_report.jsonl" : fs::path(f.report);
    std::ofstream report(report_path, std::ios::trunc);
    if (!report) throw IoError("cannot open " + report_path.string());

    TrainHooks hooks;
    hooks.interrupt = [] { return g_interrupted != 0; };
    hooks.on_epoch = [](int e, int n) { std::cout << "Epoch " << e << "/" << n << "\n"; };
    hooks.on_batch = [&](const BatchRecord& rec) {
        std::cout << format_batch_line(rec) << "\n";
        report << batch_record_json(rec) << "\n";
    };

    std::signal(SIGINT, on_sigint);
    auto state = TrainState::create(d, std::move(resolved.weights), resolved.origin);
    const TrainReport result = train(train_set, val_set, state, s.train, s.policy, hooks);
    std::signal(SIGINT, SIG_DFL);

    if (result.interrupted) {
        std::cout << "Training interrupted after " << result.images_processed << " images\n";
    } else {
        std::cout << "--- Training Complete ---\n";
    }
    std::printf("Training Accuracy: %.1f\n", result.final_train_accuracy);
    if (!result.interrupted) {
        if (result.validation_accuracy) {
            std::printf("Validation Accuracy: %.1f\n", *result.validation_accuracy);
        } else {
            std::printf("Validation disabled (validation_images = 0)\n");
        }
    }

    save_binary(state.weights, bin);
    export_header(state.weights, d, s.classes, out_dir / kHeaderFileName);
    std::cout << "Saved " << bin.string() << " and " << (out_dir / kHeaderFileName).string() << "\n";
    return kOk;
}

int cmd_infer(const Flags& f) {
    const Settings s = build_settings(f);
    const NetDims d = derive_dims(s.net);
    if (f.image.empty()) throw ConfigError("--image is required");
    auto resolved = resolve(f, s, d);
    if (resolved.origin == WeightOrigin::FromHeInit) {
        std::cerr << "Warning: no trained weights found; predicting with He-initialized weights\n";
    }
    ImageLoader loader(s.net.input_size);
    const auto input = loader.load(f.image);
    auto acts = ActivationSet<float>::allocate(d);
    const auto probs = forward_pass<float>(d, input, resolved.weights, s.policy, acts);
    const int pred = argmax(probs);
    std::printf("Pred: %s (%.1f%%)\n", s.classes.labels[static_cast<std::size_t>(pred)].c_str(),
                100.0 * probs[static_cast<std::size_t>(pred)]);
    std::printf("All:");
    for (std::size_t c = 0; c < probs.size(); ++c) {
        std::printf(" %s %.1f%%", s.classes.labels[c].c_str(), 100.0 * probs[c]);
    }
    std::printf("\n");
    return kOk;
}

int cmd_eval(const Flags& f) {
    const Settings s = build_settings(f);
    const NetDims d = derive_dims(s.net);
    const DatasetIndex index = scan(require_data(f), s.classes, s.train.validation_images);
    auto resolved = resolve(f, s, d);
    std::cout << "Weights: " << origin_name(resolved.origin) << " (" << resolved.source << ")\n";

    std::vector<LabeledPath> items;
    std::string title;
    if (f.split == "validation") {
        items = validation_items(index);
        title = "Validation Accuracy";
        if (items.empty()) {
            std::cout << "Validation disabled (validation_images = 0)\n";
            return kOk;
        }
    } else if (f.split == "train") {
        items = train_items(index);
        title = "Training Accuracy";
    } else if (f.split == "all") {
        items = train_items(index);
        const auto val = validation_items(index);
        items.insert(items.end(), val.begin(), val.end());
        title = "Accuracy";
    } else {
        throw ConfigError("--split must be train, validation or all");
    }

    ImageLoader loader(s.net.input_size);
    const auto samples = load_samples(items, loader);
    const EvalResult r = evaluate(samples, d, resolved.weights, s.policy);
    std::printf("%s: %.1f\n", title.c_str(), r.accuracy.value_or(0.0));
    print_eval(r, s.classes);
    return kOk;
}

int cmd_export(const Flags& f) {
    const Settings s = build_settings(f);
    const NetDims d = derive_dims(s.net);
    auto resolved = resolve(f, s, d);
    fs::path out = f.output;
    if (out.empty()) out = weights_dir(require_data(f)) / kHeaderFileName;
    export_header(resolved.weights, d, s.classes, out);
    std::cout << "Exported " << origin_name(resolved.origin) << " weights to " << out.string() << "\n";
    return kOk;
}

int cmd_inspect(const Flags& f) {
    const Settings s = build_settings(f);
    const NetDims d = derive_dims(s.net);
    auto resolved = resolve(f, s, d);
    std::cout << "Origin: " << origin_name(resolved.origin) << " (" << resolved.source << ")\n";
    std::printf("Input %d -> conv1 %d -> pool %d -> conv2 %d -> flattened %zu, %zu parameters\n", d.cfg.input_size,
                d.conv1_out, d.pool1_out, d.conv2_out, d.flattened, d.total_params);

    const auto k1 = static_cast<double>(d.cfg.conv1_kernel);
    const auto k2 = static_cast<double>(d.cfg.conv2_kernel);
    const double fan_in[6] = {k1 * k1 * NetConfig::input_channels, 0, k2 * k2 * d.cfg.conv1_filters, 0,
                              static_cast<double>(d.flattened), 0};
    std::printf("%-9s %7s %11s %11s %11s %11s %11s\n", "array", "count", "min", "max", "mean", "std", "he_std");
    const auto arrays = resolved.weights.arrays();
    for (std::size_t k = 0; k < arrays.size(); ++k) {
        const auto& a = *arrays[k];
        double sum = 0, sq = 0;
        for (float v : a) sum += v;
        const double mean = sum / static_cast<double>(a.size());
        for (float v : a) sq += (v - mean) * (v - mean);
        const double sd = std::sqrt(sq / static_cast<double>(a.size()));
        const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
        std::printf("%-9s %7zu %11.6f %11.6f %11.6f %11.6f", std::string(kParamArrayNames[k]).c_str(), a.size(),
                    *lo, *hi, mean, sd);
        if (fan_in[k] > 0) std::printf(" %11.6f", std::sqrt(2.0 / fan_in[k]));
        std::printf("\n");
    }
    return kOk;
}

int cmd_bench(const Flags& f) {
    const Settings s = build_settings(f);
    const NetDims d = derive_dims(s.net);
    if (f.frames < 1) throw ConfigError("--frames must be >= 1");
    auto resolved = resolve(f, s, d);

    RgbImage frame;
    if (f.image.empty()) {
        frame = solid_color_image({128, 128, 128}, 240, 0.1, s.train.shuffle_seed);
    } else {
        frame = center_crop(read_ppm(f.image));
    }
    const ResizePlan plan = build_resize_plan(s.net.input_size, frame.width);
    std::vector<float> input(d.input_len());
    auto acts = ActivationSet<float>::allocate(d);

    using clock = std::chrono::steady_clock;
    std::vector<double> ms;
    int pred = 0;
    for (int k = 1; k <= f.frames; ++k) {
        const auto t0 = clock::now();
        resize_normalize(frame.pixels, plan, input);
        pred = argmax(forward_pass<float>(d, input, resolved.weights, s.policy, acts));
        const double dt = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
        ms.push_back(dt);
        std::printf("Frame %d: %.3f ms (%.1f FPS)\n", k, dt, 1000.0 / dt);
    }
    double total = 0;
    for (double v : ms) total += v;
    const double mean = total / static_cast<double>(ms.size());
    const auto [lo, hi] = std::minmax_element(ms.begin(), ms.end());
    std::printf("Frames: %d  Mean: %.3f ms (%.1f FPS)  Min: %.3f ms  Max: %.3f ms  Last pred: %s\n", f.frames, mean,
                1000.0 / mean, *lo, *hi, s.classes.labels[static_cast<std::size_t>(pred)].c_str());
    return kOk;
}

int cmd_gradcheck(const Flags& f) {
    Flags g = f;
    if (!g.input_size) g.input_size = 8;
    const Settings s = build_settings(g);
    if (f.draws < 1) throw ConfigError("--draws must be >= 1");
    const auto summary = oracle::run_gradcheck(s.net, static_cast<std::size_t>(f.draws), s.train.shuffle_seed, s.policy);
    const bool pass = summary.max_rel_error < 1e-3;
    std::printf("Gradient check: input_size=%d, %zu draws, %zu parameters compared, %zu masked\n", s.net.input_size,
                summary.draws, summary.compared, summary.masked);
    std::printf("Max relative error: %.3e (threshold 1e-3) %s\n", summary.max_rel_error, pass ? "PASS" : "FAIL");
    return pass ? kOk : kNumeric;
}

int cmd_synth(const Flags& f) {
    const Settings s = build_settings(f);
    SyntheticSpec spec;
    spec.images_per_class = f.per_class;
    spec.seed = s.train.shuffle_seed;
    write_synthetic_dataset(require_data(f), s.classes, spec);
    std::cout << "Wrote " << f.per_class << " images for each of " << s.classes.size() << " classes under " << f.data
              << "\n";
    return kOk;
}

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return kConfig;
        case ErrorKind::Dataset: return kDataset;
        case ErrorKind::Numeric: return kNumeric;
        case ErrorKind::Io: return kIo;
    }
    return kFailure;
}

const char* category(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Config: return "config";
        case ErrorKind::Dataset: return "dataset";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Io: return "io";
    }
    return "error";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tinycnn - two-conv-layer CNN trainer and inference engine"};
    app.require_subcommand(1);
    Flags f;

    const auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--data", f.data, "Dataset root (<root>/<label>/*.ppm, weights in <root>/header)");
        cmd->add_option("--weights", f.weights, "Weight binary (default <data>/header/myWeights.bin)");
        cmd->add_option("--config", f.config, "KEY=VALUE configuration file");
        cmd->add_option("--input-size", f.input_size, "Network input side");
        cmd->add_option("--labels", f.labels, "Comma-separated class labels");
        cmd->add_option("--seed", f.seed, "Shuffle and initialization seed");
        cmd->add_option("--val", f.val, "Validation images held out per class");
        cmd->add_flag("--no-baked", f.no_baked, "Ignore build-embedded weights");
    };

    auto* train_cmd = app.add_subcommand("train", "Train on a dataset and save weights");
    add_common(train_cmd);
    train_cmd->add_option("--epochs", f.epochs, "Epochs");
    train_cmd->add_option("--batch", f.batch, "Batch size");
    train_cmd->add_option("--lr", f.lr, "Learning rate");
    train_cmd->add_flag("--no-shuffle", f.no_shuffle, "Keep index order every epoch");
    train_cmd->add_option("--report", f.report, "JSON-lines batch report (default <weights dir>/train_report.jsonl)");

    auto* infer_cmd = app.add_subcommand("infer", "Classify one PPM image");
    add_common(infer_cmd);
    infer_cmd->add_option("--image", f.image, "PPM image")->required();

    auto* eval_cmd = app.add_subcommand("eval", "Accuracy and confusion matrix on a split");
    add_common(eval_cmd);
    eval_cmd->add_option("--split", f.split, "train, validation or all");

    auto* export_cmd = app.add_subcommand("export-header", "Write resolved weights as a C header");
    add_common(export_cmd);
    export_cmd->add_option("--output", f.output, "Header path (default <data>/header/myWeights.h)");

    auto* inspect_cmd = app.add_subcommand("inspect", "Per-array weight statistics");
    add_common(inspect_cmd);

    auto* bench_cmd = app.add_subcommand("bench", "Time resize + forward passes");
    add_common(bench_cmd);
    bench_cmd->add_option("--image", f.image, "PPM frame (default: synthetic 240x240)");
    bench_cmd->add_option("--frames", f.frames, "Frames to time");

    auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of the backward pass");
    add_common(grad_cmd);
    grad_cmd->add_option("--draws", f.draws, "Random (weights, input, label) draws");

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic solid-color PPM dataset");
    add_common(synth_cmd);
    synth_cmd->add_option("--per-class", f.per_class, "Images per class");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*train_cmd) return cmd_train(f);
        if (*infer_cmd) return cmd_infer(f);
        if (*eval_cmd) return cmd_eval(f);
        if (*export_cmd) return cmd_export(f);
        if (*inspect_cmd) return cmd_inspect(f);
        if (*bench_cmd) return cmd_bench(f);
        if (*grad_cmd) return cmd_gradcheck(f);
        if (*synth_cmd) return cmd_synth(f);
    } catch (const Error& e) {
        std::cerr << category(e.kind()) << " error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kFailure;
}
