#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinycnn/config.hpp"
#include "tinycnn/forward.hpp"

namespace tinycnn {

// Binary PPM ("P6", maxval 255). Comments between header fields are allowed.
RgbImage decode_ppm(std::span<const std::uint8_t> bytes, std::string_view name = "<memory>");
RgbImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);

struct ClassFiles {
    std::string label;
    std::vector<std::filesystem::path> train;       // sorted by filename
    std::vector<std::filesystem::path> validation;  // the last N files in sorted order
};

/// Folder-per-class dataset: `<root>/<label>/*.ppm`, class index = label position.
struct DatasetIndex {
    std::filesystem::path root;
    std::vector<ClassFiles> classes;

    std::size_t train_count() const;
    std::size_t validation_count() const;
};

struct LabeledPath {
    std::filesystem::path path;
    int label = 0;
};

/// Train or validation files of every class, in class order then filename order.
std::vector<LabeledPath> train_items(const DatasetIndex& index);
std::vector<LabeledPath> validation_items(const DatasetIndex& index);

/// Sorts `.ppm` files of each class bytewise by filename and holds out the
/// last `validation_images` per class. Throws DatasetError for a missing class
/// directory or a class left without training images.
DatasetIndex scan(const std::filesystem::path& root, const ClassMap& classes, int validation_images);

/// Bytewise filename order, independent of locale.
void sort_by_filename(std::vector<std::filesystem::path>& files);

/// Decodes PPM files into network input tensors, caching one resize plan per
/// source side.
class ImageLoader {
public:
    explicit ImageLoader(int input_size) : input_size_(input_size) {}

    /// Center-crops to square, then resizes and normalizes.
    std::vector<float> load(const std::filesystem::path& path);
    std::vector<float> prepare(const RgbImage& image);

    const ResizePlan& plan_for(int source_side);

private:
    int input_size_;
    std::map<int, ResizePlan> plans_;
};

}  // namespace tinycnn
