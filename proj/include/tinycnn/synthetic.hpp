#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "tinycnn/config.hpp"
#include "tinycnn/forward.hpp"

namespace tinycnn {

struct SyntheticSpec {
    int images_per_class = 30;
    int side = 96;
    double noise = 0.10;  // per-pixel uniform noise, fraction of full scale
    std::uint64_t seed = 42;
};

/// Solid-color field with independent uniform noise on every channel.
RgbImage solid_color_image(std::array<std::uint8_t, 3> color, int side, double noise, std::uint64_t seed);

/// Distinct, well separated base colors for `count` classes.
std::vector<std::array<std::uint8_t, 3>> class_palette(int count);

/// Writes `<root>/<label>/img_NNN.ppm` for every label.
void write_synthetic_dataset(const std::filesystem::path& root, const ClassMap& classes, const SyntheticSpec& spec);

}  // namespace tinycnn
