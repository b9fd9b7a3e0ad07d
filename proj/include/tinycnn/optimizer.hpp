#pragma once

#include <cstdint>

#include "tinycnn/config.hpp"
#include "tinycnn/params.hpp"

namespace tinycnn {

/// Adam moments, zero-initialized, and the global step counter. The counter
/// only grows within a session; it is not persisted with the weights.
struct AdamState {
    ParamArrays<float> m;
    ParamArrays<float> v;
    std::uint64_t step = 0;

    static AdamState fresh(const NetDims& d) { return {ParamArrays<float>::zeros(d), ParamArrays<float>::zeros(d), 0}; }
};

/// lr * sqrt(1 - beta2^step) / (1 - beta1^step), evaluated in double.
double bias_corrected_lr(const TrainConfig& cfg, std::uint64_t step);

/// One bias-corrected Adam update over every parameter array, followed by
/// clipping each weight to +-policy.weight_clip. Increments state.step first.
/// Throws NumericFault if any updated weight is NaN/Inf.
void adam_step(WeightSet& weights, const ParamArrays<float>& grads, AdamState& state, const TrainConfig& cfg,
               const NumericPolicy& policy);

}  // namespace tinycnn
