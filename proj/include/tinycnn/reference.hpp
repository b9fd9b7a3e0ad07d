#pragma once

// Serial, un-hoisted versions of the convolution and dense kernels. Kept for
// tests and the kernel benchmark; forward results are bit-identical to
// kernels:: because the per-element summation order is the same. The backward
// version scatters contributions in the textbook order, so it agrees with
// kernels::conv_backward only up to rounding.

#include <cstddef>
#include <span>

#include "tinycnn/kernels.hpp"

namespace tinycnn::reference {

template <class T>
std::size_t conv_forward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                         std::span<const T> biases, ActivationParams<T> act, std::span<T> out);

template <class T>
std::size_t dense_forward(std::span<const T> x, std::span<const T> weights, std::span<const T> biases,
                          std::span<T> logits);

template <class T>
std::size_t conv_backward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                          std::span<const T> dz, T grad_clip, std::span<T> w_grad, std::span<T> b_grad,
                          std::span<T> in_grad);

}  // namespace tinycnn::reference
