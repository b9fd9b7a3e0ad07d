#pragma once

// Data-parallel inner loops of the network. Every kernel parallelizes over
// independent output elements and keeps each element's summation order fixed,
// so results are bit-identical for any thread count and match the serial
// versions in reference.hpp.
//
// Kernels that can observe a non-finite intermediate return the number of
// non-finite values seen; callers turn a nonzero count into NumericFault.

#include <cstddef>
#include <cstdint>
#include <span>

namespace tinycnn {

enum class Layout {
    Interleaved,  // (y*S + x)*C + c, camera RGB order
    Planar,       // c*S*S + y*S + x, filter-major activation maps
};

/// Valid (no padding), stride-1 convolution geometry.
/// Weight layout: f*(K*K*C) + ky*(K*C) + kx*C + c.
struct ConvGeometry {
    int in_side = 0;
    int in_channels = 0;
    Layout layout = Layout::Interleaved;
    int kernel = 0;
    int filters = 0;

    int out_side() const { return in_side - kernel + 1; }
    std::size_t pixel_stride() const { return layout == Layout::Interleaved ? in_channels : 1; }
    std::size_t channel_stride() const {
        return layout == Layout::Interleaved ? 1 : static_cast<std::size_t>(in_side) * in_side;
    }
    std::size_t in_len() const { return static_cast<std::size_t>(in_side) * in_side * in_channels; }
    std::size_t out_len() const { return static_cast<std::size_t>(filters) * out_side() * out_side(); }
    std::size_t weights_per_filter() const { return static_cast<std::size_t>(kernel) * kernel * in_channels; }
    std::size_t weight_len() const { return weights_per_filter() * filters; }
};

/// Activation applied after the bias: leaky_relu(clamp(sum + b, preact_clip)).
template <class T>
struct ActivationParams {
    T preact_clip;
    T leaky_alpha;
};

namespace kernels {

// Per (ky, kx) the channel products are summed first, then added to the running sum.
template <class T>
std::size_t conv_forward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                         std::span<const T> biases, ActivationParams<T> act, std::span<T> out);

/// Non-overlapping 2x2 max pooling over planar maps. Argmax is the winning cell
/// index dy*2+dx within the window; strict comparison keeps the first maximum.
template <class T>
void maxpool_forward(int channels, int in_side, std::span<const T> in, std::span<T> out,
                     std::span<std::uint8_t> argmax);

/// logits[c] = Kahan-fold of x[i]*w[c*F+i], plus b[c].
template <class T>
std::size_t dense_forward(std::span<const T> x, std::span<const T> weights, std::span<const T> biases,
                          std::span<T> logits);

/// Dense layer adjoint for one image. Accumulates clip(delta_c*x_i) into w_grad and
/// clip(delta_c) into b_grad, and writes
/// x_grad[i] = clip(leaky_grad(x_i) * sum_c delta_c*w[c*F+i]), where x is the
/// post-activation input (its sign equals the pre-activation sign).
template <class T>
std::size_t dense_backward(std::span<const T> x, std::span<const T> weights, std::span<const T> delta,
                           T grad_clip, T leaky_alpha, std::span<T> w_grad, std::span<T> b_grad,
                           std::span<T> x_grad);

/// Convolution adjoint for one image given the pre-activation gradient `dz`.
/// Per-image weight and bias contributions are clipped, then accumulated.
/// When `in_grad` is non-empty it receives the clipped full-correlation
/// input gradient in the input's layout.
template <class T>
std::size_t conv_backward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                          std::span<const T> dz, T grad_clip, std::span<T> w_grad, std::span<T> b_grad,
                          std::span<T> in_grad);

/// Routes each pooled gradient to its recorded argmax cell; other cells get zero.
template <class T>
void maxpool_backward(int channels, int in_side, std::span<const T> pooled_grad,
                      std::span<const std::uint8_t> argmax, std::span<T> in_grad);

/// grad[i] = clip(grad[i] * leaky_grad(act[i]), grad_clip), act being post-activation.
template <class T>
std::size_t apply_leaky_grad(std::span<const T> act, T leaky_alpha, T grad_clip, std::span<T> grad);

}  // namespace kernels
}  // namespace tinycnn
