#include <gtest/gtest.h>

#include <fstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "tinycnn/dataset.hpp"
#include "tinycnn/error.hpp"
#include "tinycnn/synthetic.hpp"

using namespace tinycnn;
using tinycnn::test::TempDir;

namespace {

RgbImage gradient_image(int w, int h) {
    RgbImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h * 3)};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto i = static_cast<std::size_t>((y * w + x) * 3);
            img.pixels[i] = static_cast<std::uint8_t>(x);
            img.pixels[i + 1] = static_cast<std::uint8_t>(y);
            img.pixels[i + 2] = static_cast<std::uint8_t>((x + y) & 0xff);
        }
    }
    return img;
}

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

void touch_class(const std::filesystem::path& dir, const std::vector<std::string>& names) {
    std::filesystem::create_directories(dir);
    for (const auto& n : names) write_ppm(dir / n, gradient_image(4, 4));
}

ClassMap single(const std::string& label) { return ClassMap{{label}}; }

}  // namespace

TEST(Ppm, RoundTrip) {
    TempDir tmp("ppm");
    const auto img = gradient_image(7, 5);
    write_ppm(tmp.path() / "a.ppm", img);
    const auto back = read_ppm(tmp.path() / "a.ppm");
    EXPECT_EQ(back.width, 7);
    EXPECT_EQ(back.height, 5);
    EXPECT_EQ(back.pixels, img.pixels);
}

TEST(Ppm, CommentsInHeader) {
    std::string s = "P6\n# made by hand\n2 # width\n1\n255\n";
    s += std::string("\x01\x02\x03\x04\x05\x06", 6);
    const auto img = decode_ppm(bytes_of(s));
    EXPECT_EQ(img.width, 2);
    EXPECT_EQ(img.height, 1);
    EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6}));
}

TEST(Ppm, MalformedInputsRejected) {
    EXPECT_THROW(decode_ppm(bytes_of("P3\n1 1\n255\n\x01\x02\x03")), DatasetError);
    EXPECT_THROW(decode_ppm(bytes_of("P6\n1 1\n65535\n\x01\x02\x03")), DatasetError);
    EXPECT_THROW(decode_ppm(bytes_of("P6\n2 2\n255\n\x01\x02\x03")), DatasetError);
    EXPECT_THROW(decode_ppm(bytes_of("P6\n0 2\n255\n")), DatasetError);
    EXPECT_THROW(decode_ppm(bytes_of("P6\n")), DatasetError);
    EXPECT_THROW(decode_ppm(bytes_of("")), DatasetError);
    EXPECT_THROW(read_ppm("/nonexistent/file.ppm"), IoError);
}

TEST(Split, LastNHeldOut) {
    TempDir tmp("split");
    touch_class(tmp.path() / "k", {"e.ppm", "c.ppm", "a.ppm", "d.ppm", "b.ppm"});
    const auto idx = scan(tmp.path(), single("k"), 3);
    ASSERT_EQ(idx.classes.size(), 1u);
    std::vector<std::string> train, val;
    for (const auto& p : idx.classes[0].train) train.push_back(p.filename().string());
    for (const auto& p : idx.classes[0].validation) val.push_back(p.filename().string());
    EXPECT_EQ(train, (std::vector<std::string>{"a.ppm", "b.ppm"}));
    EXPECT_EQ(val, (std::vector<std::string>{"c.ppm", "d.ppm", "e.ppm"}));
}

TEST(Split, ZeroDisablesValidation) {
    TempDir tmp("split");
    touch_class(tmp.path() / "k", {"a.ppm", "b.ppm", "c.ppm"});
    const auto idx = scan(tmp.path(), single("k"), 0);
    EXPECT_EQ(idx.train_count(), 3u);
    EXPECT_EQ(idx.validation_count(), 0u);
    EXPECT_TRUE(validation_items(idx).empty());
}

TEST(Split, UndersizedClassIsError) {
    TempDir tmp("split");
    touch_class(tmp.path() / "k", {"a.ppm", "b.ppm", "c.ppm"});
    EXPECT_THROW(scan(tmp.path(), single("k"), 3), DatasetError);
    EXPECT_NO_THROW(scan(tmp.path(), single("k"), 2));
}

TEST(Split, MissingDirectoriesAreErrors) {
    TempDir tmp("split");
    EXPECT_THROW(scan(tmp.path() / "nope", single("k"), 0), DatasetError);
    EXPECT_THROW(scan(tmp.path(), single("k"), 0), DatasetError);
    EXPECT_THROW(scan(tmp.path(), single("k"), -1), ConfigError);
}

TEST(Split, BytewiseOrderAndExtensionFilter) {
    TempDir tmp("split");
    touch_class(tmp.path() / "k", {"b.ppm", "B.PPM", "a10.ppm", "a9.ppm", "_x.ppm"});
    std::ofstream(tmp.path() / "k" / "notes.txt") << "ignored";
    std::filesystem::create_directories(tmp.path() / "k" / "sub.ppm");
    const auto idx = scan(tmp.path(), single("k"), 0);
    std::vector<std::string> names;
    for (const auto& p : idx.classes[0].train) names.push_back(p.filename().string());
    // Uppercase sorts before '_' before lowercase; "a10" before "a9".
    EXPECT_EQ(names, (std::vector<std::string>{"B.PPM", "_x.ppm", "a10.ppm", "a9.ppm", "b.ppm"}));
}

TEST(Split, ItemsCarryClassIndexInLabelOrder) {
    TempDir tmp("split");
    touch_class(tmp.path() / "zeta", {"1.ppm", "2.ppm"});
    touch_class(tmp.path() / "alpha", {"1.ppm", "2.ppm", "3.ppm"});
    const auto idx = scan(tmp.path(), ClassMap{{"zeta", "alpha"}}, 1);
    const auto train = train_items(idx);
    ASSERT_EQ(train.size(), 3u);
    EXPECT_EQ(train[0].label, 0);
    EXPECT_EQ(train[1].label, 1);
    EXPECT_EQ(train[2].label, 1);
    const auto val = validation_items(idx);
    ASSERT_EQ(val.size(), 2u);
    EXPECT_EQ(val[0].path.filename(), "2.ppm");
    EXPECT_EQ(val[1].path.filename(), "3.ppm");
}

TEST(Loader, LandscapeIsCenterCroppedBeforeResize) {
    // Column value x survives as the red channel; the crop keeps x in 40..279.
    RgbImage img{320, 240, std::vector<std::uint8_t>(320 * 240 * 3)};
    for (int y = 0; y < 240; ++y) {
        for (int x = 0; x < 320; ++x) img.pixels[static_cast<std::size_t>((y * 320 + x) * 3)] = static_cast<std::uint8_t>(x >= 40 && x < 280 ? 200 : 0);
    }
    ImageLoader loader(64);
    const auto t = loader.prepare(img);
    ASSERT_EQ(t.size(), 64u * 64 * 3);
    for (std::size_t i = 0; i < t.size(); i += 3) EXPECT_FLOAT_EQ(t[i], 200 * NumericPolicy::pixel_scale);
}

TEST(Loader, IdentityAtNetworkSize) {
    const auto img = gradient_image(64, 64);
    ImageLoader loader(64);
    const auto t = loader.prepare(img);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i], img.pixels[i] * NumericPolicy::pixel_scale);
}

TEST(Loader, TooSmallImageIsDatasetError) {
    ImageLoader loader(64);
    EXPECT_THROW(loader.prepare(gradient_image(32, 32)), DatasetError);
}

TEST(Synthetic, DeterministicAndWellFormed) {
    TempDir a("syn"), b("syn");
    SyntheticSpec spec;
    spec.images_per_class = 4;
    spec.side = 16;
    write_synthetic_dataset(a.path(), ClassMap{}, spec);
    write_synthetic_dataset(b.path(), ClassMap{}, spec);
    const auto idx = scan(a.path(), ClassMap{}, 1);
    EXPECT_EQ(idx.train_count(), 9u);
    EXPECT_EQ(idx.validation_count(), 3u);
    for (const auto& item : train_items(idx)) {
        const auto rel = std::filesystem::relative(item.path, a.path());
        EXPECT_EQ(read_ppm(item.path).pixels, read_ppm(b.path() / rel).pixels);
    }
}

TEST(Synthetic, NoiseStaysWithinTenPercent) {
    const auto img = solid_color_image({100, 150, 200}, 32, 0.10, 5);
    const int base[3] = {100, 150, 200};
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        EXPECT_LE(std::abs(int(img.pixels[i]) - base[i % 3]), 26) << i;  // 0.10 * 255, rounded up
    }
}
