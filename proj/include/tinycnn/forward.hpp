#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tinycnn/config.hpp"
#include "tinycnn/kernels.hpp"
#include "tinycnn/params.hpp"

namespace tinycnn {

/// Integer source-coordinate tables mapping a square source frame onto the
/// network input by nearest center sampling. Built once, reused per frame.
struct ResizePlan {
    std::vector<int> sy_lookup;
    std::vector<int> sx_lookup;
    int source_side = 0;

    int output_side() const { return static_cast<int>(sy_lookup.size()); }
};

/// lookup[i] = min(floor((i + 0.5) * source_side / input_size), source_side - 1).
ResizePlan build_resize_plan(int input_size, int source_side);

/// Decoded 8-bit RGB image, interleaved row-major.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

/// Crops the central square of side min(width, height). Square input is returned unchanged.
RgbImage center_crop(const RgbImage& image);

/// Samples a square source frame through the plan and scales bytes by 1/255
/// (as the float constant 0.003921569). Output layout (y*S + x)*3 + c.
std::vector<float> resize_normalize(std::span<const std::uint8_t> rgb, const ResizePlan& plan);
void resize_normalize(std::span<const std::uint8_t> rgb, const ResizePlan& plan, std::span<float> out);

ConvGeometry conv1_geometry(const NetDims& d);
ConvGeometry conv2_geometry(const NetDims& d);

/// Per-image forward scratch. One set per worker.
template <class T>
struct ActivationSet {
    std::vector<T> conv1_out;
    std::vector<T> pool1_out;
    std::vector<std::uint8_t> pool1_argmax;
    std::vector<T> conv2_out;
    std::vector<T> logits;
    std::vector<T> probs;

    static ActivationSet allocate(const NetDims& d) {
        ActivationSet a;
        a.conv1_out.assign(d.conv1_len(), T(0));
        a.pool1_out.assign(d.pool1_len(), T(0));
        a.pool1_argmax.assign(d.pool1_len(), 0);
        a.conv2_out.assign(d.conv2_len(), T(0));
        a.logits.assign(static_cast<std::size_t>(d.cfg.num_classes), T(0));
        a.probs.assign(static_cast<std::size_t>(d.cfg.num_classes), T(0));
        return a;
    }
};

/// conv1 -> leaky ReLU -> maxpool -> conv2 -> leaky ReLU -> flatten -> dense -> softmax.
/// Fills every field of `acts` and returns a view of the probabilities.
/// Throws NumericFault naming the first stage that produced a non-finite value.
template <class T>
std::span<const T> forward_pass(const NetDims& d, std::span<const T> input, const ParamArrays<T>& weights,
                                const NumericPolicy& policy, ActivationSet<T>& acts);

}  // namespace tinycnn
