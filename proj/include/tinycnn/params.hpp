#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "tinycnn/config.hpp"

namespace tinycnn {

inline constexpr std::array<std::string_view, 6> kParamArrayNames{
    "conv1_w", "conv1_b", "conv2_w", "conv2_b", "output_w", "output_b"};

/// The six flat parameter-shaped arrays of the network, in persistence order.
/// Used for weights, gradient accumulators and Adam moments alike.
template <class T>
struct ParamArrays {
    std::vector<T> conv1_w;
    std::vector<T> conv1_b;
    std::vector<T> conv2_w;
    std::vector<T> conv2_b;
    std::vector<T> output_w;
    std::vector<T> output_b;

    static ParamArrays zeros(const NetDims& d) {
        ParamArrays p;
        p.conv1_w.assign(d.conv1_weights, T(0));
        p.conv1_b.assign(d.conv1_biases, T(0));
        p.conv2_w.assign(d.conv2_weights, T(0));
        p.conv2_b.assign(d.conv2_biases, T(0));
        p.output_w.assign(d.output_weights, T(0));
        p.output_b.assign(d.output_biases, T(0));
        return p;
    }

    std::array<std::vector<T>*, 6> arrays() {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &output_w, &output_b};
    }
    std::array<const std::vector<T>*, 6> arrays() const {
        return {&conv1_w, &conv1_b, &conv2_w, &conv2_b, &output_w, &output_b};
    }

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto* a : arrays()) n += a->size();
        return n;
    }

    /// True when every array has the length the dims call for.
    bool matches(const NetDims& d) const {
        return conv1_w.size() == d.conv1_weights && conv1_b.size() == d.conv1_biases &&
               conv2_w.size() == d.conv2_weights && conv2_b.size() == d.conv2_biases &&
               output_w.size() == d.output_weights && output_b.size() == d.output_biases;
    }

    /// Flat view over all parameters in persistence order.
    T& at(std::size_t flat) {
        for (auto* a : arrays()) {
            if (flat < a->size()) return (*a)[flat];
            flat -= a->size();
        }
        return conv1_w.at(conv1_w.size());  // throws
    }
    const T& at(std::size_t flat) const { return const_cast<ParamArrays*>(this)->at(flat); }

    template <class U>
    ParamArrays<U> cast() const {
        ParamArrays<U> out;
        auto dst = out.arrays();
        auto src = arrays();
        for (std::size_t k = 0; k < src.size(); ++k) dst[k]->assign(src[k]->begin(), src[k]->end());
        return out;
    }

    bool operator==(const ParamArrays&) const = default;
};

using WeightSet = ParamArrays<float>;

}  // namespace tinycnn
