#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tinycnn/config.hpp"
#include "tinycnn/params.hpp"

namespace tinycnn {

inline constexpr std::string_view kBinaryFileName = "myWeights.bin";
inline constexpr std::string_view kHeaderFileName = "myWeights.h";
inline constexpr std::string_view kGeneratorName = "tinycnn v1.0.0";

enum class WeightOrigin { FromBinary, FromBaked, FromHeInit };

struct ResolvedWeights {
    WeightSet weights;
    WeightOrigin origin = WeightOrigin::FromHeInit;
    std::string source;  // file path, "baked", or "he-init seed=<n>"
};

/// Session banner for the origin: "Continuing from saved weights" or "Starting fresh training".
std::string_view origin_banner(WeightOrigin origin);
std::string_view origin_name(WeightOrigin origin);

/// `<data-root>/header`, where trained weights are read and written.
std::filesystem::path weights_dir(const std::filesystem::path& data_root);

/// Gaussian He initialization, std = sqrt(2 / fan_in) per layer, zero biases.
/// Deterministic for a fixed seed; draws beyond +-weight_clip are clamped.
WeightSet he_init(const NetDims& d, std::uint64_t seed, float weight_clip = NumericPolicy{}.weight_clip);

/// Little-endian binary32 arrays, concatenated in persistence order, no header.
void save_binary(const WeightSet& weights, const std::filesystem::path& path);

/// Throws SizeMismatchError unless the file is exactly total_params * 4 bytes,
/// IoError when it cannot be read.
WeightSet load_binary(const std::filesystem::path& path, const NetDims& d);

/// C header text with generation metadata, label comments, activation
/// instructions and six `const float myModel_*[]` arrays. Values use 9
/// significant digits, enough to round-trip binary32 exactly.
std::string render_header(const WeightSet& weights, const NetDims& d, const ClassMap& classes);
void export_header(const WeightSet& weights, const NetDims& d, const ClassMap& classes,
                   const std::filesystem::path& path);

/// Parses the numerals of the six arrays back out of header text.
WeightSet parse_header(std::string_view text, const NetDims& d);

/// Weight set embedded at build time (CMake option TINYCNN_BAKED_WEIGHTS), or
/// nullopt when none was embedded. Throws ConfigError if the embedded arrays
/// do not fit `d`.
std::optional<WeightSet> baked_weights(const NetDims& d);

/// Three-tier priority: a binary file that exists wins, then the baked set,
/// then He initialization. A binary that exists but fails validation throws.
ResolvedWeights resolve_weights(const std::optional<std::filesystem::path>& binary_path,
                                const std::optional<WeightSet>& baked, const NetDims& d, std::uint64_t seed);

}  // namespace tinycnn
