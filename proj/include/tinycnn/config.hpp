#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tinycnn {

/// Network shape. Every layer dimension downstream is derived from these fields.
struct NetConfig {
    int input_size = 64;
    int conv1_kernel = 3;
    int conv1_filters = 4;
    int conv2_kernel = 3;
    int conv2_filters = 8;
    int num_classes = 3;
    static constexpr int input_channels = 3;

    bool operator==(const NetConfig&) const = default;
};

struct TrainConfig {
    // Hyperparameters are held in double; the optimizer narrows them to float
    // for the per-element update.
    double learning_rate = 0.0003;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-6;
    int batch_size = 6;
    int epochs = 20;
    int validation_images = 3;
    std::uint64_t shuffle_seed = 42;
    bool shuffle_enabled = true;

    void validate() const;
};

struct NumericPolicy {
    float grad_clip = 100.0f;
    float weight_clip = 10.0f;
    float preact_clip = 100.0f;
    float leaky_alpha = 0.1f;
    static constexpr float pixel_scale = 0.003921569f;

    void validate() const;
};

struct ClassMap {
    std::vector<std::string> labels{"0Blank", "1Cup", "2Pen"};

    int size() const { return static_cast<int>(labels.size()); }
    void validate(int num_classes) const;
};

/// Every size the network needs, computed once from a NetConfig.
struct NetDims {
    NetConfig cfg;

    int conv1_out = 0;
    int pool1_out = 0;
    int conv2_out = 0;
    std::size_t flattened = 0;

    std::size_t conv1_weights = 0;
    std::size_t conv1_biases = 0;
    std::size_t conv2_weights = 0;
    std::size_t conv2_biases = 0;
    std::size_t output_weights = 0;
    std::size_t output_biases = 0;
    std::size_t total_params = 0;

    std::size_t input_len() const {
        return static_cast<std::size_t>(cfg.input_size) * cfg.input_size * NetConfig::input_channels;
    }
    std::size_t conv1_len() const { return static_cast<std::size_t>(cfg.conv1_filters) * conv1_out * conv1_out; }
    std::size_t pool1_len() const { return static_cast<std::size_t>(cfg.conv1_filters) * pool1_out * pool1_out; }
    std::size_t conv2_len() const { return flattened; }

    bool operator==(const NetDims&) const = default;
};

/// Throws DimensionError when a derived size underflows or conv1's output is odd.
NetDims derive_dims(const NetConfig& cfg);

/// Everything a session needs; loaded from a KEY=VALUE file and then overridden by flags.
struct Settings {
    NetConfig net;
    TrainConfig train;
    NumericPolicy policy;
    ClassMap classes;

    void validate() const;
};

/// Applies one KEY=VALUE pair. Unknown keys and malformed values throw ConfigError.
void apply_setting(Settings& settings, std::string_view key, std::string_view value);

/// Parses a configuration file on top of `base`. Blank lines and '#' comments are skipped.
Settings load_settings(const std::filesystem::path& path, Settings base = {});
Settings parse_settings(std::string_view text, Settings base = {});

}  // namespace tinycnn
