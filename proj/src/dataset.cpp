#include "tinycnn/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <system_error>

#include "tinycnn/error.hpp"

namespace tinycnn {

namespace {

struct HeaderReader {
    HeaderReader(std::span<const std::uint8_t> bytes, std::string_view name) : bytes_(bytes), name_(name) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    long read_int(const char* field) {
        skip_space_and_comments();
        long value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > 1'000'000) fail(std::string(field) + " is implausibly large");
            ++pos_;
            ++digits;
        }
        if (digits == 0) fail(std::string("missing ") + field);
        return value;
    }

    [[noreturn]] void fail(const std::string& why) const {
        throw DatasetError("malformed PPM " + std::string(name_) + ": " + why);
    }

    std::span<const std::uint8_t> bytes_;
    std::string_view name_;
    std::size_t pos_ = 0;
};

}  // namespace

RgbImage decode_ppm(std::span<const std::uint8_t> bytes, std::string_view name) {
    HeaderReader r(bytes, name);
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') r.fail("magic is not P6");
    r.pos_ = 2;
    const long width = r.read_int("width");
    const long height = r.read_int("height");
    const long maxval = r.read_int("maxval");
    if (width <= 0 || height <= 0) r.fail("zero dimension");
    if (maxval != 255) r.fail("maxval " + std::to_string(maxval) + " (only 255 is supported)");
    if (r.pos_ >= bytes.size() || !std::isspace(bytes[r.pos_])) r.fail("missing whitespace after maxval");
    ++r.pos_;

    const auto need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
    if (bytes.size() - r.pos_ < need) {
        r.fail("truncated pixel data (" + std::to_string(bytes.size() - r.pos_) + " of " + std::to_string(need) +
               " bytes)");
    }
    RgbImage img;
    img.width = static_cast<int>(width);
    img.height = static_cast<int>(height);
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_),
                      bytes.begin() + static_cast<std::ptrdiff_t>(r.pos_ + need));
    return img;
}

RgbImage read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_ppm(bytes, path.string());
}

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

std::size_t DatasetIndex::train_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.train.size();
    return n;
}

std::size_t DatasetIndex::validation_count() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.validation.size();
    return n;
}

namespace {

std::vector<LabeledPath> collect(const DatasetIndex& index, bool validation) {
    std::vector<LabeledPath> out;
    for (std::size_t k = 0; k < index.classes.size(); ++k) {
        const auto& files = validation ? index.classes[k].validation : index.classes[k].train;
        for (const auto& f : files) out.push_back({f, static_cast<int>(k)});
    }
    return out;
}

bool has_ppm_extension(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".ppm";
}

}  // namespace

std::vector<LabeledPath> train_items(const DatasetIndex& index) { return collect(index, false); }
std::vector<LabeledPath> validation_items(const DatasetIndex& index) { return collect(index, true); }

void sort_by_filename(std::vector<std::filesystem::path>& files) {
    // std::string comparison goes through char_traits<char>, which orders like memcmp.
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });
}

DatasetIndex scan(const std::filesystem::path& root, const ClassMap& classes, int validation_images) {
    if (validation_images < 0) throw ConfigError("validation_images must be >= 0");
    std::error_code ec;
    if (!std::filesystem::is_directory(root, ec)) throw DatasetError("dataset root " + root.string() + " not found");

    DatasetIndex index;
    index.root = root;
    const auto held_out = static_cast<std::size_t>(validation_images);
    for (const auto& label : classes.labels) {
        const auto dir = root / label;
        if (!std::filesystem::is_directory(dir, ec)) {
            throw DatasetError("class directory " + dir.string() + " is missing");
        }
        std::vector<std::filesystem::path> files;
        std::filesystem::directory_iterator it(dir, ec);
        if (ec) throw DatasetError("cannot list " + dir.string() + ": " + ec.message());
        for (const auto& entry : it) {
            if (entry.is_regular_file() && has_ppm_extension(entry.path())) files.push_back(entry.path());
        }
        sort_by_filename(files);
        if (files.size() < held_out + 1) {
            throw DatasetError("class '" + label + "' has " + std::to_string(files.size()) +
                               " images; need at least " + std::to_string(held_out + 1) + " to keep one for training");
        }
        ClassFiles cf;
        cf.label = label;
        const auto split = files.end() - static_cast<std::ptrdiff_t>(held_out);
        cf.train.assign(files.begin(), split);
        cf.validation.assign(split, files.end());
        index.classes.push_back(std::move(cf));
    }
    return index;
}

const ResizePlan& ImageLoader::plan_for(int source_side) {
    auto it = plans_.find(source_side);
    if (it == plans_.end()) {
        try {
            it = plans_.emplace(source_side, build_resize_plan(input_size_, source_side)).first;
        } catch (const std::invalid_argument&) {
            throw DatasetError("image side " + std::to_string(source_side) + " is smaller than the network input " +
                               std::to_string(input_size_));
        }
    }
    return it->second;
}

std::vector<float> ImageLoader::prepare(const RgbImage& image) {
    const RgbImage square = center_crop(image);
    return resize_normalize(square.pixels, plan_for(square.width));
}

std::vector<float> ImageLoader::load(const std::filesystem::path& path) { return prepare(read_ppm(path)); }

}  // namespace tinycnn
