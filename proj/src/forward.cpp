#include "tinycnn/forward.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tinycnn/error.hpp"
#include "tinycnn/numcore.hpp"

namespace tinycnn {

ResizePlan build_resize_plan(int input_size, int source_side) {
    if (input_size <= 0 || source_side < input_size) {
        throw std::invalid_argument("resize plan needs 0 < input_size <= source_side (got " +
                                    std::to_string(input_size) + ", " + std::to_string(source_side) + ")");
    }
    ResizePlan plan;
    plan.source_side = source_side;
    plan.sy_lookup.resize(static_cast<std::size_t>(input_size));
    for (int i = 0; i < input_size; ++i) {
        // floor((i + 0.5) * source / input) in exact integer arithmetic
        const long long num = (2LL * i + 1) * source_side;
        const long long den = 2LL * input_size;
        plan.sy_lookup[static_cast<std::size_t>(i)] = static_cast<int>(std::min<long long>(num / den, source_side - 1));
    }
    plan.sx_lookup = plan.sy_lookup;
    return plan;
}

RgbImage center_crop(const RgbImage& image) {
    if (image.width == image.height) return image;
    const int side = std::min(image.width, image.height);
    const int x0 = (image.width - side) / 2;
    const int y0 = (image.height - side) / 2;
    RgbImage out;
    out.width = side;
    out.height = side;
    out.pixels.resize(static_cast<std::size_t>(side) * side * 3);
    for (int y = 0; y < side; ++y) {
        const auto* src = image.pixels.data() + (static_cast<std::size_t>(y + y0) * image.width + x0) * 3;
        std::copy_n(src, static_cast<std::size_t>(side) * 3, out.pixels.data() + static_cast<std::size_t>(y) * side * 3);
    }
    return out;
}

void resize_normalize(std::span<const std::uint8_t> rgb, const ResizePlan& plan, std::span<float> out) {
    const std::size_t src = static_cast<std::size_t>(plan.source_side);
    const int S = plan.output_side();
    if (rgb.size() != src * src * 3) {
        throw DatasetError("frame holds " + std::to_string(rgb.size()) + " bytes, plan expects " +
                           std::to_string(src * src * 3));
    }
    if (out.size() != static_cast<std::size_t>(S) * S * 3) {
        throw std::invalid_argument("resize_normalize: output buffer size mismatch");
    }
    for (int y = 0; y < S; ++y) {
        const std::size_t row = static_cast<std::size_t>(plan.sy_lookup[static_cast<std::size_t>(y)]) * src;
        for (int x = 0; x < S; ++x) {
            const std::size_t s = (row + static_cast<std::size_t>(plan.sx_lookup[static_cast<std::size_t>(x)])) * 3;
            const std::size_t dst = (static_cast<std::size_t>(y) * S + x) * 3;
            out[dst] = rgb[s] * NumericPolicy::pixel_scale;
            out[dst + 1] = rgb[s + 1] * NumericPolicy::pixel_scale;
            out[dst + 2] = rgb[s + 2] * NumericPolicy::pixel_scale;
        }
    }
}

std::vector<float> resize_normalize(std::span<const std::uint8_t> rgb, const ResizePlan& plan) {
    std::vector<float> out(static_cast<std::size_t>(plan.output_side()) * plan.output_side() * 3);
    resize_normalize(rgb, plan, out);
    return out;
}

ConvGeometry conv1_geometry(const NetDims& d) {
    return {d.cfg.input_size, NetConfig::input_channels, Layout::Interleaved, d.cfg.conv1_kernel,
            d.cfg.conv1_filters};
}

ConvGeometry conv2_geometry(const NetDims& d) {
    return {d.pool1_out, d.cfg.conv1_filters, Layout::Planar, d.cfg.conv2_kernel, d.cfg.conv2_filters};
}

template <class T>
std::span<const T> forward_pass(const NetDims& d, std::span<const T> input, const ParamArrays<T>& w,
                                const NumericPolicy& policy, ActivationSet<T>& acts) {
    if (input.size() != d.input_len()) throw std::invalid_argument("forward_pass: input size mismatch");
    if (!w.matches(d)) throw std::invalid_argument("forward_pass: weight shapes do not match the network");

    const ActivationParams<T> act{static_cast<T>(policy.preact_clip), static_cast<T>(policy.leaky_alpha)};

    if (kernels::conv_forward<T>(conv1_geometry(d), input, w.conv1_w, w.conv1_b, act, acts.conv1_out) != 0) {
        throw NumericFault("non-finite pre-activation in conv1");
    }
    kernels::maxpool_forward<T>(d.cfg.conv1_filters, d.conv1_out, acts.conv1_out, acts.pool1_out, acts.pool1_argmax);
    if (kernels::conv_forward<T>(conv2_geometry(d), acts.pool1_out, w.conv2_w, w.conv2_b, act, acts.conv2_out) != 0) {
        throw NumericFault("non-finite pre-activation in conv2");
    }
    if (kernels::dense_forward<T>(acts.conv2_out, w.output_w, w.output_b, acts.logits) != 0) {
        throw NumericFault("non-finite logit in dense layer");
    }
    softmax<T>(acts.logits, acts.probs);
    return acts.probs;
}

template std::span<const float> forward_pass<float>(const NetDims&, std::span<const float>, const ParamArrays<float>&,
                                                    const NumericPolicy&, ActivationSet<float>&);
template std::span<const double> forward_pass<double>(const NetDims&, std::span<const double>,
                                                      const ParamArrays<double>&, const NumericPolicy&,
                                                      ActivationSet<double>&);

}  // namespace tinycnn
