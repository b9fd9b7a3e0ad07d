#include "tinycnn/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "tinycnn/error.hpp"

namespace tinycnn {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const char* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("invalid value for " + std::string(key) + ": '" + std::string(value) + "'");
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("invalid boolean for " + std::string(key) + ": '" + std::string(value) + "'");
}

std::vector<std::string> parse_labels(std::string_view value) {
    std::vector<std::string> labels;
    std::size_t start = 0;
    while (start <= value.size()) {
        auto comma = value.find(',', start);
        if (comma == std::string_view::npos) comma = value.size();
        labels.emplace_back(trim(value.substr(start, comma - start)));
        start = comma + 1;
    }
    return labels;
}

void require_positive(int v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be positive");
}

}  // namespace

NetDims derive_dims(const NetConfig& cfg) {
    require_positive(cfg.input_size, "input_size");
    require_positive(cfg.conv1_kernel, "conv1_kernel");
    require_positive(cfg.conv1_filters, "conv1_filters");
    require_positive(cfg.conv2_kernel, "conv2_kernel");
    require_positive(cfg.conv2_filters, "conv2_filters");
    if (cfg.num_classes < 2) throw ConfigError("num_classes must be at least 2");

    NetDims d;
    d.cfg = cfg;
    d.conv1_out = cfg.input_size - (cfg.conv1_kernel - 1);
    if (d.conv1_out < 2) {
        throw DimensionError("conv1 output " + std::to_string(d.conv1_out) + " is too small (input_size " +
                             std::to_string(cfg.input_size) + ")");
    }
    if (d.conv1_out % 2 != 0) {
        throw DimensionError("conv1 output " + std::to_string(d.conv1_out) + " is odd; 2x2 pooling needs an even size");
    }
    d.pool1_out = d.conv1_out / 2;
    d.conv2_out = d.pool1_out - (cfg.conv2_kernel - 1);
    if (d.conv2_out < 1) {
        throw DimensionError("conv2 output " + std::to_string(d.conv2_out) + " underflows (pool1 output " +
                             std::to_string(d.pool1_out) + ")");
    }
    const auto sq = [](std::size_t v) { return v * v; };
    d.flattened = sq(d.conv2_out) * cfg.conv2_filters;

    d.conv1_weights = static_cast<std::size_t>(cfg.conv1_filters) * sq(cfg.conv1_kernel) * NetConfig::input_channels;
    d.conv1_biases = cfg.conv1_filters;
    d.conv2_weights = static_cast<std::size_t>(cfg.conv2_filters) * sq(cfg.conv2_kernel) * cfg.conv1_filters;
    d.conv2_biases = cfg.conv2_filters;
    d.output_weights = static_cast<std::size_t>(cfg.num_classes) * d.flattened;
    d.output_biases = cfg.num_classes;
    d.total_params =
        d.conv1_weights + d.conv1_biases + d.conv2_weights + d.conv2_biases + d.output_weights + d.output_biases;
    return d;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(beta1 > 0 && beta1 < 1)) throw ConfigError("beta1 must lie in (0, 1)");
    if (!(beta2 > 0 && beta2 < 1)) throw ConfigError("beta2 must lie in (0, 1)");
    if (!(epsilon > 0)) throw ConfigError("epsilon must be > 0");
    require_positive(batch_size, "batch_size");
    require_positive(epochs, "epochs");
    if (validation_images < 0) throw ConfigError("validation_images must be >= 0");
}

void NumericPolicy::validate() const {
    if (!(grad_clip > 0) || !(weight_clip > 0) || !(preact_clip > 0)) {
        throw ConfigError("clip bounds must be > 0");
    }
    if (!(leaky_alpha > 0)) throw ConfigError("leaky_alpha must be > 0");
}

void ClassMap::validate(int num_classes) const {
    if (size() != num_classes) {
        throw ConfigError("expected " + std::to_string(num_classes) + " class labels, got " +
                          std::to_string(size()));
    }
    std::set<std::string> seen;
    for (const auto& label : labels) {
        if (label.empty()) throw ConfigError("class labels must be non-empty");
        if (!seen.insert(label).second) throw ConfigError("duplicate class label '" + label + "'");
    }
}

void Settings::validate() const {
    derive_dims(net);
    train.validate();
    policy.validate();
    classes.validate(net.num_classes);
}

void apply_setting(Settings& s, std::string_view key, std::string_view raw) {
    const auto value = trim(raw);
    if (key == "input_size") s.net.input_size = parse_number<int>(key, value);
    else if (key == "conv1_kernel") s.net.conv1_kernel = parse_number<int>(key, value);
    else if (key == "conv1_filters") s.net.conv1_filters = parse_number<int>(key, value);
    else if (key == "conv2_kernel") s.net.conv2_kernel = parse_number<int>(key, value);
    else if (key == "conv2_filters") s.net.conv2_filters = parse_number<int>(key, value);
    else if (key == "num_classes") s.net.num_classes = parse_number<int>(key, value);
    else if (key == "labels") {
        s.classes.labels = parse_labels(value);
        s.net.num_classes = s.classes.size();
    }
    else if (key == "learning_rate") s.train.learning_rate = parse_number<double>(key, value);
    else if (key == "beta1") s.train.beta1 = parse_number<double>(key, value);
    else if (key == "beta2") s.train.beta2 = parse_number<double>(key, value);
    else if (key == "epsilon") s.train.epsilon = parse_number<double>(key, value);
    else if (key == "batch_size") s.train.batch_size = parse_number<int>(key, value);
    else if (key == "epochs") s.train.epochs = parse_number<int>(key, value);
    else if (key == "validation_images") s.train.validation_images = parse_number<int>(key, value);
    else if (key == "shuffle_seed") s.train.shuffle_seed = parse_number<std::uint64_t>(key, value);
    else if (key == "shuffle_enabled") s.train.shuffle_enabled = parse_bool(key, value);
    else if (key == "grad_clip") s.policy.grad_clip = parse_number<float>(key, value);
    else if (key == "weight_clip") s.policy.weight_clip = parse_number<float>(key, value);
    else if (key == "preact_clip") s.policy.preact_clip = parse_number<float>(key, value);
    else if (key == "leaky_alpha") s.policy.leaky_alpha = parse_number<float>(key, value);
    else throw ConfigError("unknown configuration key '" + std::string(key) + "'");
}

Settings parse_settings(std::string_view text, Settings base) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto content = trim(line);
        if (content.empty() || content.front() == '#') continue;
        const auto eq = content.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected KEY=VALUE");
        }
        apply_setting(base, trim(content.substr(0, eq)), content.substr(eq + 1));
    }
    return base;
}

Settings load_settings(const std::filesystem::path& path, Settings base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_settings(text.str(), std::move(base));
}

}  // namespace tinycnn
