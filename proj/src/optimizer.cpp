#include "tinycnn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

#include "tinycnn/error.hpp"
#include "tinycnn/numcore.hpp"

namespace tinycnn {

double bias_corrected_lr(const TrainConfig& cfg, std::uint64_t step) {
    const auto t = static_cast<double>(step);
    return cfg.learning_rate * std::sqrt(1.0 - std::pow(cfg.beta2, t)) / (1.0 - std::pow(cfg.beta1, t));
}

void adam_step(WeightSet& weights, const ParamArrays<float>& grads, AdamState& state, const TrainConfig& cfg,
               const NumericPolicy& policy) {
    ++state.step;
    const auto lr_t = static_cast<float>(bias_corrected_lr(cfg, state.step));
    // 1 - beta is formed in double: 1 - 0.999f is off by 1.3e-5 relative.
    const auto b1 = static_cast<float>(cfg.beta1);
    const auto b2 = static_cast<float>(cfg.beta2);
    const auto c1 = static_cast<float>(1.0 - cfg.beta1);
    const auto c2 = static_cast<float>(1.0 - cfg.beta2);
    const auto eps = static_cast<float>(cfg.epsilon);

    auto w_arrays = weights.arrays();
    const auto g_arrays = grads.arrays();
    auto m_arrays = state.m.arrays();
    auto v_arrays = state.v.arrays();

    std::size_t faults = 0;
    for (std::size_t k = 0; k < w_arrays.size(); ++k) {
        auto& w = *w_arrays[k];
        const auto& g = *g_arrays[k];
        auto& m = *m_arrays[k];
        auto& v = *v_arrays[k];
        if (g.size() != w.size() || m.size() != w.size() || v.size() != w.size()) {
            throw std::invalid_argument("adam_step: array shape mismatch");
        }
        const long n = static_cast<long>(w.size());
#pragma omp parallel for reduction(+ : faults) if (n > 8192)
        for (long j = 0; j < n; ++j) {
            const auto i = static_cast<std::size_t>(j);
            m[i] = b1 * m[i] + c1 * g[i];
            v[i] = b2 * v[i] + c2 * g[i] * g[i];
            w[i] -= lr_t * m[i] / (std::sqrt(v[i]) + eps);
            if (!std::isfinite(w[i])) ++faults;
            w[i] = clamp_symmetric(w[i], policy.weight_clip);
        }
    }
    if (faults != 0) throw NumericFault("Adam update produced non-finite weights");
}

}  // namespace tinycnn
