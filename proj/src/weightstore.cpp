#include "tinycnn/weightstore.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "tinycnn/error.hpp"
#include "tinycnn/rng.hpp"

namespace tinycnn {

std::string_view origin_banner(WeightOrigin origin) {
    return origin == WeightOrigin::FromHeInit ? "Starting fresh training" : "Continuing from saved weights";
}

std::string_view origin_name(WeightOrigin origin) {
    switch (origin) {
        case WeightOrigin::FromBinary: return "binary";
        case WeightOrigin::FromBaked: return "baked";
        case WeightOrigin::FromHeInit: return "he-init";
    }
    return "unknown";
}

std::filesystem::path weights_dir(const std::filesystem::path& data_root) { return data_root / "header"; }

WeightSet he_init(const NetDims& d, std::uint64_t seed, float weight_clip) {
    WeightSet w = WeightSet::zeros(d);
    Rng rng(seed);
    const auto fill = [&](std::vector<float>& arr, std::size_t fan_in) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
        for (auto& x : arr) {
            x = std::clamp(static_cast<float>(rng.normal() * stddev), -weight_clip, weight_clip);
        }
    };
    const auto k1 = static_cast<std::size_t>(d.cfg.conv1_kernel);
    const auto k2 = static_cast<std::size_t>(d.cfg.conv2_kernel);
    fill(w.conv1_w, k1 * k1 * NetConfig::input_channels);
    fill(w.conv2_w, k2 * k2 * static_cast<std::size_t>(d.cfg.conv1_filters));
    fill(w.output_w, d.flattened);
    return w;
}

void save_binary(const WeightSet& weights, const std::filesystem::path& path) {
    std::vector<char> bytes;
    bytes.reserve(weights.total() * 4);
    for (const auto* arr : weights.arrays()) {
        for (float v : *arr) {
            const auto bits = std::bit_cast<std::uint32_t>(v);
            for (int shift = 0; shift < 32; shift += 8) bytes.push_back(static_cast<char>((bits >> shift) & 0xFF));
        }
    }
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

WeightSet load_binary(const std::filesystem::path& path, const NetDims& d) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(path, ec);
    if (ec) throw IoError("cannot stat " + path.string() + ": " + ec.message());
    const auto expected = static_cast<std::uintmax_t>(d.total_params) * 4;
    if (size != expected) {
        throw SizeMismatchError(path.string() + " is " + std::to_string(size) + " bytes, expected " +
                                std::to_string(expected) + " (" + std::to_string(d.total_params) +
                                " parameters)");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("failed reading " + path.string());

    WeightSet w = WeightSet::zeros(d);
    std::size_t pos = 0;
    for (auto* arr : w.arrays()) {
        for (auto& v : *arr) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * b);
            v = std::bit_cast<float>(bits);
        }
    }
    return w;
}

namespace {

std::string format_float(float v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 9);
    return std::string(buf.data(), ptr);
}

std::string array_symbol(std::string_view name) { return "myModel_" + std::string(name); }

}  // namespace

std::string render_header(const WeightSet& weights, const NetDims& d, const ClassMap& classes) {
    std::ostringstream out;
    out << "// Auto-generated by " << kGeneratorName << "\n";
    out << "//   #define INPUT_SIZE " << d.cfg.input_size << "\n";
    out << "//   #define NUM_CLASSES " << d.cfg.num_classes << "\n";
    out << "//   String myClassLabels[] = {";
    for (std::size_t i = 0; i < classes.labels.size(); ++i) {
        out << (i ? ", " : "") << '"' << classes.labels[i] << '"';
    }
    out << "};\n";
    out << "// To use: copy to sketch folder, then uncomment:\n";
    out << "//   #define USE_BAKED_WEIGHTS\n";
    out << "// Total parameters: " << d.total_params << "\n";

    const auto arrays = weights.arrays();
    for (std::size_t k = 0; k < arrays.size(); ++k) {
        const auto& arr = *arrays[k];
        out << "\nconst float " << array_symbol(kParamArrayNames[k]) << "[] = {  // " << arr.size() << " values\n";
        for (std::size_t i = 0; i < arr.size(); ++i) {
            out << (i % 8 == 0 ? "  " : " ") << format_float(arr[i]) << ',';
            if (i % 8 == 7 || i + 1 == arr.size()) out << '\n';
        }
        out << "};\n";
    }
    return out.str();
}

void export_header(const WeightSet& weights, const NetDims& d, const ClassMap& classes,
                   const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << render_header(weights, d, classes);
    if (!out) throw IoError("failed writing " + path.string());
}

WeightSet parse_header(std::string_view text, const NetDims& d) {
    WeightSet w = WeightSet::zeros(d);
    auto arrays = w.arrays();
    for (std::size_t k = 0; k < arrays.size(); ++k) {
        const auto symbol = array_symbol(kParamArrayNames[k]) + "[]";
        const auto at = text.find(symbol);
        if (at == std::string_view::npos) throw ConfigError("header lacks array " + symbol);
        const auto open = text.find('{', at);
        const auto close = text.find('}', open);
        if (open == std::string_view::npos || close == std::string_view::npos) {
            throw ConfigError("malformed initializer for " + symbol);
        }
        auto& arr = *arrays[k];
        std::size_t count = 0;
        std::size_t pos = open + 1;
        while (pos < close) {
            // Skip separators and trailing line comments.
            const char ch = text[pos];
            if (ch == ',' || ch == ' ' || ch == '\n' || ch == '\r' || ch == '\t') {
                ++pos;
                continue;
            }
            if (text.compare(pos, 2, "//") == 0) {
                pos = text.find('\n', pos);
                if (pos == std::string_view::npos) pos = close;
                continue;
            }
            float v = 0;
            auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + close, v);
            if (ec != std::errc{}) throw ConfigError("bad numeral in " + symbol);
            if (count >= arr.size()) {
                throw ConfigError(symbol + " has more than the expected " + std::to_string(arr.size()) + " values");
            }
            arr[count++] = v;
            pos = static_cast<std::size_t>(ptr - text.data());
            if (pos < close && text[pos] == 'f') ++pos;
        }
        if (count != arr.size()) {
            throw ConfigError(symbol + " has " + std::to_string(count) + " values, expected " +
                              std::to_string(arr.size()));
        }
    }
    return w;
}

ResolvedWeights resolve_weights(const std::optional<std::filesystem::path>& binary_path,
                                const std::optional<WeightSet>& baked, const NetDims& d, std::uint64_t seed) {
    if (binary_path && std::filesystem::exists(*binary_path)) {
        return {load_binary(*binary_path, d), WeightOrigin::FromBinary, binary_path->string()};
    }
    if (baked) {
        if (!baked->matches(d)) throw ConfigError("baked weights do not match the configured network");
        return {*baked, WeightOrigin::FromBaked, "baked"};
    }
    return {he_init(d, seed), WeightOrigin::FromHeInit, "he-init seed=" + std::to_string(seed)};
}

}  // namespace tinycnn
