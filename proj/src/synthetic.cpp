#include "tinycnn/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tinycnn/dataset.hpp"
#include "tinycnn/rng.hpp"

namespace tinycnn {

RgbImage solid_color_image(std::array<std::uint8_t, 3> color, int side, double noise, std::uint64_t seed) {
    Rng rng(seed);
    RgbImage img;
    img.width = side;
    img.height = side;
    img.pixels.resize(static_cast<std::size_t>(side) * side * 3);
    const double spread = noise * 255.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double v = color[i % 3] + rng.uniform(-spread, spread);
        img.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return img;
}

std::vector<std::array<std::uint8_t, 3>> class_palette(int count) {
    static constexpr std::array<std::array<std::uint8_t, 3>, 8> base{{
        {200, 40, 40}, {40, 200, 40}, {40, 40, 200}, {200, 200, 40},
        {200, 40, 200}, {40, 200, 200}, {230, 230, 230}, {20, 20, 20},
    }};
    std::vector<std::array<std::uint8_t, 3>> out;
    for (int i = 0; i < count; ++i) {
        auto c = base[static_cast<std::size_t>(i) % base.size()];
        // Beyond eight classes, darken each repeat of the palette.
        const int round = i / static_cast<int>(base.size());
        for (auto& ch : c) ch = static_cast<std::uint8_t>(ch / (1 + round));
        out.push_back(c);
    }
    return out;
}

void write_synthetic_dataset(const std::filesystem::path& root, const ClassMap& classes, const SyntheticSpec& spec) {
    const auto palette = class_palette(classes.size());
    Rng seeds(spec.seed);
    for (int k = 0; k < classes.size(); ++k) {
        const auto dir = root / classes.labels[static_cast<std::size_t>(k)];
        std::filesystem::create_directories(dir);
        for (int i = 0; i < spec.images_per_class; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "img_%03d.ppm", i);
            write_ppm(dir / name, solid_color_image(palette[static_cast<std::size_t>(k)], spec.side, spec.noise,
                                                    seeds.next()));
        }
    }
}

}  // namespace tinycnn
