#include "tinycnn/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "tinycnn/numcore.hpp"

namespace tinycnn::kernels {

namespace {

// Below this many multiply-adds the thread fork costs more than it saves.
constexpr std::size_t kParallelWork = std::size_t{1} << 15;

}  // namespace

template <class T>
std::size_t conv_forward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                         std::span<const T> biases, ActivationParams<T> act, std::span<T> out) {
    const int S = g.in_side;
    const int K = g.kernel;
    const int C = g.in_channels;
    const int O = g.out_side();
    const std::size_t pix = g.pixel_stride();
    const std::size_t chs = g.channel_stride();
    const std::size_t wpf = g.weights_per_filter();
    const T* src = in.data();
    const T* wts = weights.data();
    const T* bias = biases.data();
    T* dst = out.data();

    std::size_t faults = 0;
    const long rows = static_cast<long>(g.filters) * O;
#pragma omp parallel for reduction(+ : faults) if (g.out_len() * wpf > kParallelWork)
    for (long r = 0; r < rows; ++r) {
        const int f = static_cast<int>(r / O);
        const int y = static_cast<int>(r % O);
        const T* wf = wts + f * wpf;
        T* orow = dst + static_cast<std::size_t>(f) * O * O + static_cast<std::size_t>(y) * O;
        const T b = bias[f];
        for (int x = 0; x < O; ++x) {
            T sum = 0;
            for (int ky = 0; ky < K; ++ky) {
                const std::size_t row = static_cast<std::size_t>(y + ky) * S + x;
                const T* wk = wf + static_cast<std::size_t>(ky) * K * C;
                for (int kx = 0; kx < K; ++kx) {
                    const T* ip = src + (row + kx) * pix;
                    const T* wp = wk + static_cast<std::size_t>(kx) * C;
                    T part = 0;
                    for (int c = 0; c < C; ++c) part += ip[c * chs] * wp[c];
                    sum += part;
                }
            }
            const T z = sum + b;
            if (!std::isfinite(z)) ++faults;
            orow[x] = leaky_relu(clamp_symmetric(z, act.preact_clip), act.leaky_alpha);
        }
    }
    return faults;
}

template <class T>
void maxpool_forward(int channels, int in_side, std::span<const T> in, std::span<T> out,
                     std::span<std::uint8_t> argmax) {
    const int P = in_side / 2;
    const long rows = static_cast<long>(channels) * P;
#pragma omp parallel for if (static_cast<std::size_t>(rows) * P * 4 > kParallelWork)
    for (long r = 0; r < rows; ++r) {
        const int ch = static_cast<int>(r / P);
        const int py = static_cast<int>(r % P);
        const T* plane = in.data() + static_cast<std::size_t>(ch) * in_side * in_side;
        const std::size_t ob = static_cast<std::size_t>(ch) * P * P + static_cast<std::size_t>(py) * P;
        for (int px = 0; px < P; ++px) {
            const T* top = plane + static_cast<std::size_t>(2 * py) * in_side + 2 * px;
            const T cells[4] = {top[0], top[1], top[in_side], top[in_side + 1]};
            std::uint8_t best = 0;
            for (std::uint8_t k = 1; k < 4; ++k) {
                if (cells[k] > cells[best]) best = k;
            }
            out[ob + px] = cells[best];
            argmax[ob + px] = best;
        }
    }
}

template <class T>
std::size_t dense_forward(std::span<const T> x, std::span<const T> weights, std::span<const T> biases,
                          std::span<T> logits) {
    const std::size_t F = x.size();
    const long classes = static_cast<long>(logits.size());
    std::size_t faults = 0;
#pragma omp parallel for reduction(+ : faults) if (F * logits.size() > kParallelWork)
    for (long c = 0; c < classes; ++c) {
        const T* w = weights.data() + static_cast<std::size_t>(c) * F;
        KahanAccumulator<T> acc;
        for (std::size_t i = 0; i < F; ++i) acc.add(x[i] * w[i]);
        const T logit = acc.value() + biases[static_cast<std::size_t>(c)];
        if (!std::isfinite(logit)) ++faults;
        logits[static_cast<std::size_t>(c)] = logit;
    }
    return faults;
}

template <class T>
std::size_t dense_backward(std::span<const T> x, std::span<const T> weights, std::span<const T> delta,
                           T grad_clip, T leaky_alpha, std::span<T> w_grad, std::span<T> b_grad,
                           std::span<T> x_grad) {
    const std::size_t F = x.size();
    const std::size_t C = delta.size();
    std::size_t faults = 0;

    const long total = static_cast<long>(C * F);
#pragma omp parallel for reduction(+ : faults) if (C * F > kParallelWork)
    for (long k = 0; k < total; ++k) {
        const std::size_t c = static_cast<std::size_t>(k) / F;
        const std::size_t i = static_cast<std::size_t>(k) % F;
        const T g = delta[c] * x[i];
        if (!std::isfinite(g)) ++faults;
        w_grad[static_cast<std::size_t>(k)] += clamp_symmetric(g, grad_clip);
    }
    for (std::size_t c = 0; c < C; ++c) {
        if (!std::isfinite(delta[c])) ++faults;
        b_grad[c] += clamp_symmetric(delta[c], grad_clip);
    }

    const long features = static_cast<long>(F);
#pragma omp parallel for reduction(+ : faults) if (C * F > kParallelWork)
    for (long i = 0; i < features; ++i) {
        T s = 0;
        for (std::size_t c = 0; c < C; ++c) s += delta[c] * weights[c * F + static_cast<std::size_t>(i)];
        const T g = s * leaky_relu_grad(x[static_cast<std::size_t>(i)], leaky_alpha);
        if (!std::isfinite(g)) ++faults;
        x_grad[static_cast<std::size_t>(i)] = clamp_symmetric(g, grad_clip);
    }
    return faults;
}

template <class T>
std::size_t conv_backward(const ConvGeometry& g, std::span<const T> in, std::span<const T> weights,
                          std::span<const T> dz, T grad_clip, std::span<T> w_grad, std::span<T> b_grad,
                          std::span<T> in_grad) {
    const int S = g.in_side;
    const int K = g.kernel;
    const int C = g.in_channels;
    const int O = g.out_side();
    const std::size_t pix = g.pixel_stride();
    const std::size_t chs = g.channel_stride();
    const std::size_t wpf = g.weights_per_filter();
    const std::size_t plane = static_cast<std::size_t>(O) * O;
    const std::size_t work = g.out_len() * wpf;
    std::size_t faults = 0;

    // Weight gradient: one correlation of dz with the shifted input per weight.
    const long nweights = static_cast<long>(g.weight_len());
#pragma omp parallel for reduction(+ : faults) if (work > kParallelWork)
    for (long k = 0; k < nweights; ++k) {
        const std::size_t f = static_cast<std::size_t>(k) / wpf;
        const std::size_t rem = static_cast<std::size_t>(k) % wpf;
        const int ky = static_cast<int>(rem / (static_cast<std::size_t>(K) * C));
        const int kx = static_cast<int>((rem / C) % K);
        const int c = static_cast<int>(rem % C);
        const T* d = dz.data() + f * plane;
        const T* base = in.data() + c * chs;
        T s = 0;
        for (int y = 0; y < O; ++y) {
            const T* drow = d + static_cast<std::size_t>(y) * O;
            const std::size_t row = static_cast<std::size_t>(y + ky) * S + kx;
            for (int x = 0; x < O; ++x) s += drow[x] * base[(row + x) * pix];
        }
        if (!std::isfinite(s)) ++faults;
        w_grad[static_cast<std::size_t>(k)] += clamp_symmetric(s, grad_clip);
    }

    for (int f = 0; f < g.filters; ++f) {
        const T* d = dz.data() + static_cast<std::size_t>(f) * plane;
        T s = 0;
        for (std::size_t j = 0; j < plane; ++j) s += d[j];
        if (!std::isfinite(s)) ++faults;
        b_grad[static_cast<std::size_t>(f)] += clamp_symmetric(s, grad_clip);
    }

    if (in_grad.empty()) return faults;

    // Input gradient: full correlation of dz with the kernel.
    const long rows = static_cast<long>(C) * S;
#pragma omp parallel for reduction(+ : faults) if (work > kParallelWork)
    for (long r = 0; r < rows; ++r) {
        const int c = static_cast<int>(r / S);
        const int yy = static_cast<int>(r % S);
        for (int xx = 0; xx < S; ++xx) {
            T s = 0;
            for (int f = 0; f < g.filters; ++f) {
                const T* d = dz.data() + static_cast<std::size_t>(f) * plane;
                const T* wf = weights.data() + static_cast<std::size_t>(f) * wpf + c;
                for (int ky = std::max(0, yy - O + 1); ky <= std::min(K - 1, yy); ++ky) {
                    const T* drow = d + static_cast<std::size_t>(yy - ky) * O;
                    const T* wk = wf + static_cast<std::size_t>(ky) * K * C;
                    for (int kx = std::max(0, xx - O + 1); kx <= std::min(K - 1, xx); ++kx) {
                        s += drow[xx - kx] * wk[static_cast<std::size_t>(kx) * C];
                    }
                }
            }
            if (!std::isfinite(s)) ++faults;
            in_grad[(static_cast<std::size_t>(yy) * S + xx) * pix + c * chs] = clamp_symmetric(s, grad_clip);
        }
    }
    return faults;
}

template <class T>
void maxpool_backward(int channels, int in_side, std::span<const T> pooled_grad,
                      std::span<const std::uint8_t> argmax, std::span<T> in_grad) {
    const int P = in_side / 2;
    std::fill(in_grad.begin(), in_grad.end(), T(0));
    const long rows = static_cast<long>(channels) * P;
#pragma omp parallel for if (static_cast<std::size_t>(rows) * P * 4 > kParallelWork)
    for (long r = 0; r < rows; ++r) {
        const int ch = static_cast<int>(r / P);
        const int py = static_cast<int>(r % P);
        T* plane = in_grad.data() + static_cast<std::size_t>(ch) * in_side * in_side;
        const std::size_t pb = static_cast<std::size_t>(ch) * P * P + static_cast<std::size_t>(py) * P;
        for (int px = 0; px < P; ++px) {
            const int cell = argmax[pb + px];
            const int y = 2 * py + cell / 2;
            const int x = 2 * px + cell % 2;
            plane[static_cast<std::size_t>(y) * in_side + x] = pooled_grad[pb + px];
        }
    }
}

template <class T>
std::size_t apply_leaky_grad(std::span<const T> act, T leaky_alpha, T grad_clip, std::span<T> grad) {
    std::size_t faults = 0;
    const long n = static_cast<long>(grad.size());
#pragma omp parallel for reduction(+ : faults) if (grad.size() > kParallelWork)
    for (long i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const T g = grad[k] * leaky_relu_grad(act[k], leaky_alpha);
        if (!std::isfinite(g)) ++faults;
        grad[k] = clamp_symmetric(g, grad_clip);
    }
    return faults;
}

#define TINYCNN_INSTANTIATE(T)                                                                               \
    template std::size_t conv_forward<T>(const ConvGeometry&, std::span<const T>, std::span<const T>,         \
                                         std::span<const T>, ActivationParams<T>, std::span<T>);              \
    template void maxpool_forward<T>(int, int, std::span<const T>, std::span<T>, std::span<std::uint8_t>);    \
    template std::size_t dense_forward<T>(std::span<const T>, std::span<const T>, std::span<const T>,         \
                                          std::span<T>);                                                      \
    template std::size_t dense_backward<T>(std::span<const T>, std::span<const T>, std::span<const T>, T, T,  \
                                           std::span<T>, std::span<T>, std::span<T>);                         \
    template std::size_t conv_backward<T>(const ConvGeometry&, std::span<const T>, std::span<const T>,        \
                                          std::span<const T>, T, std::span<T>, std::span<T>, std::span<T>);   \
    template void maxpool_backward<T>(int, int, std::span<const T>, std::span<const std::uint8_t>,            \
                                      std::span<T>);                                                          \
    template std::size_t apply_leaky_grad<T>(std::span<const T>, T, T, std::span<T>);

TINYCNN_INSTANTIATE(float)
TINYCNN_INSTANTIATE(double)

#undef TINYCNN_INSTANTIATE

}  // namespace tinycnn::kernels
