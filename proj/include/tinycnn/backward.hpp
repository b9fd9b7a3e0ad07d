#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tinycnn/config.hpp"
#include "tinycnn/forward.hpp"
#include "tinycnn/params.hpp"

namespace tinycnn {

/// Counts of each zeroing level, for checking the batch/image discipline.
struct ZeroingStats {
    std::size_t accumulator_zeroings = 0;
    std::size_t propagation_zeroings = 0;
};

/// Weight-gradient accumulators (summed over the images since the last batch
/// boundary) plus the per-image propagation buffers that carry the error
/// signal between layers.
template <class T>
struct GradientSet {
    ParamArrays<T> accum;

    std::vector<T> dense_grad;  // d loss / d conv2 pre-activation, flattened
    std::vector<T> pool1_grad;
    std::vector<T> conv1_grad;  // d loss / d conv1 pre-activation

    ZeroingStats stats;

    static GradientSet allocate(const NetDims& d) {
        GradientSet g;
        g.accum = ParamArrays<T>::zeros(d);
        g.dense_grad.assign(d.flattened, T(0));
        g.pool1_grad.assign(d.pool1_len(), T(0));
        g.conv1_grad.assign(d.conv1_len(), T(0));
        return g;
    }
};

/// Zeroes the six weight-gradient accumulators. Propagation buffers are left alone.
template <class T>
void zero_batch_grads(GradientSet<T>& grads);

/// Backpropagates one image whose forward pass filled `acts` and adds its
/// clipped contributions to the accumulators. Propagation buffers are zeroed
/// on entry. Throws NumericFault if any gradient is NaN/Inf before clipping,
/// std::out_of_range for a bad class index.
template <class T>
void backward_image(const NetDims& d, const ActivationSet<T>& acts, std::span<const T> input, int true_class,
                    const ParamArrays<T>& weights, GradientSet<T>& grads, const NumericPolicy& policy);

}  // namespace tinycnn
