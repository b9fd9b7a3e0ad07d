#include "tinycnn/backward.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "tinycnn/error.hpp"
#include "tinycnn/kernels.hpp"

namespace tinycnn {

template <class T>
void zero_batch_grads(GradientSet<T>& grads) {
    for (auto* a : grads.accum.arrays()) std::fill(a->begin(), a->end(), T(0));
    ++grads.stats.accumulator_zeroings;
}

template <class T>
void backward_image(const NetDims& d, const ActivationSet<T>& acts, std::span<const T> input, int true_class,
                    const ParamArrays<T>& w, GradientSet<T>& g, const NumericPolicy& policy) {
    const auto C = static_cast<std::size_t>(d.cfg.num_classes);
    if (true_class < 0 || static_cast<std::size_t>(true_class) >= C) {
        throw std::out_of_range("backward_image: class index " + std::to_string(true_class) + " out of range");
    }
    const T clip = static_cast<T>(policy.grad_clip);
    const T alpha = static_cast<T>(policy.leaky_alpha);

    std::fill(g.dense_grad.begin(), g.dense_grad.end(), T(0));
    std::fill(g.pool1_grad.begin(), g.pool1_grad.end(), T(0));
    std::fill(g.conv1_grad.begin(), g.conv1_grad.end(), T(0));
    ++g.stats.propagation_zeroings;

    // Softmax + cross-entropy: d loss / d logit = p - onehot.
    std::vector<T> delta(acts.probs.begin(), acts.probs.end());
    delta[static_cast<std::size_t>(true_class)] -= T(1);

    std::size_t faults = kernels::dense_backward<T>(acts.conv2_out, w.output_w, delta, clip, alpha,
                                                    g.accum.output_w, g.accum.output_b, g.dense_grad);
    if (faults != 0) throw NumericFault("non-finite gradient in dense layer");

    faults = kernels::conv_backward<T>(conv2_geometry(d), acts.pool1_out, w.conv2_w, g.dense_grad, clip,
                                       g.accum.conv2_w, g.accum.conv2_b, g.pool1_grad);
    if (faults != 0) throw NumericFault("non-finite gradient in conv2");

    kernels::maxpool_backward<T>(d.cfg.conv1_filters, d.conv1_out, g.pool1_grad, acts.pool1_argmax, g.conv1_grad);
    faults = kernels::apply_leaky_grad<T>(acts.conv1_out, alpha, clip, g.conv1_grad);
    if (faults != 0) throw NumericFault("non-finite gradient at conv1 activation");

    faults = kernels::conv_backward<T>(conv1_geometry(d), input, w.conv1_w, g.conv1_grad, clip, g.accum.conv1_w,
                                       g.accum.conv1_b, std::span<T>{});
    if (faults != 0) throw NumericFault("non-finite gradient in conv1");
}

template void zero_batch_grads<float>(GradientSet<float>&);
template void zero_batch_grads<double>(GradientSet<double>&);
template void backward_image<float>(const NetDims&, const ActivationSet<float>&, std::span<const float>, int,
                                    const ParamArrays<float>&, GradientSet<float>&, const NumericPolicy&);
template void backward_image<double>(const NetDims&, const ActivationSet<double>&, std::span<const double>, int,
                                     const ParamArrays<double>&, GradientSet<double>&, const NumericPolicy&);

}  // namespace tinycnn
