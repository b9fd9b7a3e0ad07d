#pragma once

// Double-precision reference network written with naive index arithmetic and
// plain summation. Shares no loop code with forward/backward; it is the
// ground truth for the gradient check.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tinycnn/config.hpp"
#include "tinycnn/params.hpp"

namespace tinycnn::oracle {

struct Trace {
    std::vector<double> conv1_pre;  // before clamp and activation
    std::vector<double> conv1_act;
    std::vector<double> pooled;
    std::vector<int> pool_winner;  // 0..3 within each window
    std::vector<double> conv2_pre;
    std::vector<double> conv2_act;
    std::vector<double> logits;
    std::vector<double> probs;
    double loss = 0;  // cross-entropy against true_class, or 0 if none was given
};

Trace forward(const NetDims& d, const ParamArrays<double>& w, std::span<const double> input,
              const NumericPolicy& policy, int true_class = -1);

/// Central differences (L(w+h) - L(w-h)) / 2h for every parameter. A parameter
/// is masked when either perturbation flips a leaky-ReLU sign, a clamp
/// saturation or a pooling winner anywhere in the network, since the loss is
/// not differentiable across those points.
struct NumericGradients {
    ParamArrays<double> grads;
    std::vector<bool> masked;  // flat, persistence order
    std::size_t masked_count = 0;
    std::size_t saturated_units = 0;  // units already clamped at the base point
};

NumericGradients finite_diff_grads(const NetDims& d, const ParamArrays<double>& w, std::span<const double> input,
                                   int true_class, const NumericPolicy& policy, double h = 1e-3);

struct GradCheckSummary {
    double max_rel_error = 0;
    std::size_t compared = 0;
    std::size_t masked = 0;
    std::size_t draws = 0;
    std::size_t worst_param = 0;  // flat index of the worst parameter in its draw
};

/// max |analytic - numeric| / max(|numeric|, floor) over unmasked parameters.
GradCheckSummary compare(const ParamArrays<double>& analytic, const NumericGradients& numeric, double floor = 1e-6);

/// Random (weights, input, label) draws checked against the library's
/// backward pass instantiated in double precision.
GradCheckSummary run_gradcheck(const NetConfig& cfg, std::size_t draws, std::uint64_t seed,
                               const NumericPolicy& policy = {}, double h = 1e-3);

}  // namespace tinycnn::oracle
