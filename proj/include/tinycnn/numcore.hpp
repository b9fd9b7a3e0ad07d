#pragma once

// Numeric safety kernel: compensated summation, activations, clipping, softmax
// and cross-entropy. Templated on the scalar so the gradient checker can run
// the same formulas in double precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "tinycnn/error.hpp"

namespace tinycnn {

/// Compensated sum, Kahan-Babuska (Neumaier) form. The lost low-order part is
/// taken from whichever operand is smaller, so a term larger than the running
/// sum cannot swallow the compensation: [1e8, 1, -1e8] folds to 1 in float,
/// where the textbook Kahan update returns 0.
template <class T>
struct KahanAccumulator {
    T sum{0};
    T compensation{0};

    void add(T term) {
        const T t = sum + term;
        if (std::abs(sum) >= std::abs(term)) {
            compensation += (sum - t) + term;
        } else {
            compensation += (term - t) + sum;
        }
        sum = t;
    }
    T value() const { return sum + compensation; }
};

template <class T>
KahanAccumulator<T> kahan_add(KahanAccumulator<T> acc, T term) {
    acc.add(term);
    return acc;
}

template <class T>
T kahan_sum(std::span<const T> terms) {
    KahanAccumulator<T> acc;
    for (T t : terms) acc.add(t);
    return acc.value();
}

// The subgradient at exactly zero takes the positive branch.
template <class T>
constexpr T leaky_relu(T x, T alpha = T(0.1)) {
    return x >= T(0) ? x : alpha * x;
}

template <class T>
constexpr T leaky_relu_grad(T x, T alpha = T(0.1)) {
    return x >= T(0) ? T(1) : alpha;
}

/// Symmetric clamp without NaN detection; NaN propagates unchanged.
template <class T>
constexpr T clamp_symmetric(T x, T bound) {
    return x > bound ? bound : (x < -bound ? -bound : x);
}

/// Symmetric clamp. Returns nullopt for NaN input, the numeric-fault signal.
template <class T>
std::optional<T> clip(T x, T bound) {
    if (std::isnan(x)) return std::nullopt;
    return std::min(std::max(x, -bound), bound);
}

/// Max-subtracted softmax. Throws NumericFault on a non-finite logit.
template <class T>
void softmax(std::span<const T> logits, std::span<T> out) {
    if (logits.empty() || out.size() != logits.size()) {
        throw std::invalid_argument("softmax: size mismatch");
    }
    T peak = logits[0];
    for (T l : logits) {
        if (!std::isfinite(l)) throw NumericFault("softmax: non-finite logit");
        peak = std::max(peak, l);
    }
    T denom = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        denom += out[i];
    }
    const T inv = T(1) / denom;
    for (auto& p : out) p *= inv;
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Negative log-likelihood with the probability floored at 1e-12.
template <class T>
T cross_entropy(std::span<const T> probs, int true_class) {
    if (true_class < 0 || static_cast<std::size_t>(true_class) >= probs.size()) {
        throw std::out_of_range("cross_entropy: class index " + std::to_string(true_class) + " out of range");
    }
    const T p = std::max(probs[static_cast<std::size_t>(true_class)], static_cast<T>(kProbabilityFloor));
    return -std::log(p);
}

/// Index of the largest element; ties resolve to the lowest index.
template <class T>
int argmax(std::span<const T> values) {
    int best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    }
    return best;
}

}  // namespace tinycnn
