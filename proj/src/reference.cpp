#include "tinycnn/reference.hpp"

#include <cmath>
#include <vector>

#include "tinycnn/numcore.hpp"

namespace tinycnn::reference {

namespace {

// Full index arithmetic on every access, no hoisting.
std::size_t in_index(const ConvGeometry& g, int y, int x, int c) {
    if (g.layout == Layout::Interleaved) {
        return (static_cast<std::size_t>(y) * g.in_side + x) * g.in_channels + c;
    }
    return static_cast<std::size_t>(c) * g.in_side * g.in_side + static_cast<std::size_t>(y) * g.in_side + x;
}

std::size_t w_index(const ConvGeometry& g, int f, int ky, int kx, int c) {
    return static_cast<std::size_t>(f) * g.kernel * g.kernel * g.in_channels +
           static_cast<std::size_t>(ky) * g.kernel * g.in_channels + static_cast<std::size_t>(kx) * g.in_channels + c;
}

std::size_t out_index(int side, int f, int y, int x) {
    return static_cast<std::size_t>(f) * side * side + static_cast<std::size_t>(y) * side + x;
}

}  // namespace

template <class T>
std::size_t conv_forward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                         std::span<const T> biases, ActivationParams<T> act, std::span<T> out) {
    const int O = g.out_side();
    std::size_t faults = 0;
    for (int f = 0; f < g.filters; ++f) {
        for (int y = 0; y < O; ++y) {
            for (int x = 0; x < O; ++x) {
                T sum = 0;
                for (int ky = 0; ky < g.kernel; ++ky) {
                    for (int kx = 0; kx < g.kernel; ++kx) {
                        T part = 0;
                        for (int c = 0; c < g.in_channels; ++c) {
                            part += in[in_index(g, y + ky, x + kx, c)] * weights[w_index(g, f, ky, kx, c)];
                        }
                        sum += part;
                    }
                }
                const T z = sum + biases[static_cast<std::size_t>(f)];
                if (!std::isfinite(z)) ++faults;
                out[out_index(O, f, y, x)] = leaky_relu(clamp_symmetric(z, act.preact_clip), act.leaky_alpha);
            }
        }
    }
    return faults;
}

template <class T>
std::size_t dense_forward(std::span<const T> x, std::span<const T> weights, std::span<const T> biases,
                          std::span<T> logits) {
    std::size_t faults = 0;
    for (std::size_t c = 0; c < logits.size(); ++c) {
        KahanAccumulator<T> acc;
        for (std::size_t i = 0; i < x.size(); ++i) acc.add(x[i] * weights[c * x.size() + i]);
        logits[c] = acc.value() + biases[c];
        if (!std::isfinite(logits[c])) ++faults;
    }
    return faults;
}

template <class T>
std::size_t conv_backward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                          std::span<const T> dz, T grad_clip, std::span<T> w_grad, std::span<T> b_grad,
                          std::span<T> in_grad) {
    const int O = g.out_side();
    std::vector<T> w_sum(g.weight_len(), T(0));
    std::vector<T> b_sum(static_cast<std::size_t>(g.filters), T(0));
    std::vector<T> in_sum(g.in_len(), T(0));

    for (int f = 0; f < g.filters; ++f) {
        for (int y = 0; y < O; ++y) {
            for (int x = 0; x < O; ++x) {
                const T d = dz[out_index(O, f, y, x)];
                b_sum[static_cast<std::size_t>(f)] += d;
                for (int ky = 0; ky < g.kernel; ++ky) {
                    for (int kx = 0; kx < g.kernel; ++kx) {
                        for (int c = 0; c < g.in_channels; ++c) {
                            const auto wi = w_index(g, f, ky, kx, c);
                            const auto ii = in_index(g, y + ky, x + kx, c);
                            w_sum[wi] += d * in[ii];
                            in_sum[ii] += d * weights[wi];
                        }
                    }
                }
            }
        }
    }

    std::size_t faults = 0;
    const auto add_clipped = [&](std::span<T> dst, const std::vector<T>& src, bool accumulate) {
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (!std::isfinite(src[i])) ++faults;
            const T v = clamp_symmetric(src[i], grad_clip);
            dst[i] = accumulate ? dst[i] + v : v;
        }
    };
    add_clipped(w_grad, w_sum, true);
    add_clipped(b_grad, b_sum, true);
    if (!in_grad.empty()) add_clipped(in_grad, in_sum, false);
    return faults;
}

template std::size_t conv_forward<float>(const ConvGeometry&, std::span<const float>, std::span<const float>,
                                         std::span<const float>, ActivationParams<float>, std::span<float>);
template std::size_t conv_forward<double>(const ConvGeometry&, std::span<const double>, std::span<const double>,
                                          std::span<const double>, ActivationParams<double>, std::span<double>);
template std::size_t dense_forward<float>(std::span<const float>, std::span<const float>, std::span<const float>,
                                          std::span<float>);
template std::size_t dense_forward<double>(std::span<const double>, std::span<const double>,
                                           std::span<const double>, std::span<double>);
template std::size_t conv_backward<float>(const ConvGeometry&, std::span<const float>, std::span<const float>,
                                          std::span<const float>, float, std::span<float>, std::span<float>,
                                          std::span<float>);
template std::size_t conv_backward<double>(const ConvGeometry&, std::span<const double>, std::span<const double>,
                                           std::span<const double>, double, std::span<double>, std::span<double>,
                                           std::span<double>);

}  // namespace tinycnn::reference
