#include "tinycnn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tinycnn/backward.hpp"
#include "tinycnn/forward.hpp"
#include "tinycnn/rng.hpp"
#include "tinycnn/weightstore.hpp"

namespace tinycnn::oracle {

namespace {

double activate(double z, const NumericPolicy& p) {
    const double bound = p.preact_clip;
    const double clamped = z > bound ? bound : (z < -bound ? -bound : z);
    return clamped >= 0 ? clamped : p.leaky_alpha * clamped;
}

// Which linear piece each unit sits on; the loss is smooth while this is constant.
std::vector<int> regime(const Trace& t, const NumericPolicy& p) {
    const auto code = [&](double z) {
        if (z > p.preact_clip) return 3;
        if (z < -p.preact_clip) return -3;
        return z >= 0 ? 1 : -1;
    };
    std::vector<int> r;
    r.reserve(t.conv1_pre.size() + t.pool_winner.size() + t.conv2_pre.size());
    for (double z : t.conv1_pre) r.push_back(code(z));
    for (int k : t.pool_winner) r.push_back(10 + k);
    for (double z : t.conv2_pre) r.push_back(code(z));
    return r;
}

}  // namespace

Trace forward(const NetDims& d, const ParamArrays<double>& w, std::span<const double> input,
              const NumericPolicy& policy, int true_class) {
    const NetConfig& cfg = d.cfg;
    const int S = cfg.input_size;
    const int K1 = cfg.conv1_kernel;
    const int F1 = cfg.conv1_filters;
    const int O1 = d.conv1_out;
    const int P = d.pool1_out;
    const int K2 = cfg.conv2_kernel;
    const int F2 = cfg.conv2_filters;
    const int O2 = d.conv2_out;
    const int C = cfg.num_classes;

    const auto pixel = [&](int y, int x, int c) { return input[static_cast<std::size_t>((y * S + x) * 3 + c)]; };
    const auto w1 = [&](int f, int ky, int kx, int c) {
        return w.conv1_w[static_cast<std::size_t>(((f * K1 + ky) * K1 + kx) * 3 + c)];
    };
    const auto w2 = [&](int f, int ky, int kx, int c) {
        return w.conv2_w[static_cast<std::size_t>(((f * K2 + ky) * K2 + kx) * F1 + c)];
    };

    Trace t;
    t.conv1_pre.assign(static_cast<std::size_t>(F1 * O1 * O1), 0.0);
    t.conv1_act.assign(t.conv1_pre.size(), 0.0);
    for (int f = 0; f < F1; ++f) {
        for (int y = 0; y < O1; ++y) {
            for (int x = 0; x < O1; ++x) {
                double z = w.conv1_b[static_cast<std::size_t>(f)];
                for (int c = 0; c < 3; ++c) {
                    for (int ky = 0; ky < K1; ++ky) {
                        for (int kx = 0; kx < K1; ++kx) z += pixel(y + ky, x + kx, c) * w1(f, ky, kx, c);
                    }
                }
                const auto at = static_cast<std::size_t>((f * O1 + y) * O1 + x);
                t.conv1_pre[at] = z;
                t.conv1_act[at] = activate(z, policy);
            }
        }
    }

    t.pooled.assign(static_cast<std::size_t>(F1 * P * P), 0.0);
    t.pool_winner.assign(t.pooled.size(), 0);
    for (int f = 0; f < F1; ++f) {
        for (int py = 0; py < P; ++py) {
            for (int px = 0; px < P; ++px) {
                int winner = 0;
                double best = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < 4; ++k) {
                    const int y = 2 * py + k / 2;
                    const int x = 2 * px + k % 2;
                    const double v = t.conv1_act[static_cast<std::size_t>((f * O1 + y) * O1 + x)];
                    if (v > best) {
                        best = v;
                        winner = k;
                    }
                }
                const auto at = static_cast<std::size_t>((f * P + py) * P + px);
                t.pooled[at] = best;
                t.pool_winner[at] = winner;
            }
        }
    }

    t.conv2_pre.assign(static_cast<std::size_t>(F2 * O2 * O2), 0.0);
    t.conv2_act.assign(t.conv2_pre.size(), 0.0);
    for (int f = 0; f < F2; ++f) {
        for (int y = 0; y < O2; ++y) {
            for (int x = 0; x < O2; ++x) {
                double z = w.conv2_b[static_cast<std::size_t>(f)];
                for (int c = 0; c < F1; ++c) {
                    for (int ky = 0; ky < K2; ++ky) {
                        for (int kx = 0; kx < K2; ++kx) {
                            z += t.pooled[static_cast<std::size_t>((c * P + y + ky) * P + x + kx)] * w2(f, ky, kx, c);
                        }
                    }
                }
                const auto at = static_cast<std::size_t>((f * O2 + y) * O2 + x);
                t.conv2_pre[at] = z;
                t.conv2_act[at] = activate(z, policy);
            }
        }
    }

    const std::size_t flat = t.conv2_act.size();
    t.logits.assign(static_cast<std::size_t>(C), 0.0);
    for (int c = 0; c < C; ++c) {
        double s = w.output_b[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < flat; ++i) s += t.conv2_act[i] * w.output_w[static_cast<std::size_t>(c) * flat + i];
        t.logits[static_cast<std::size_t>(c)] = s;
    }

    const double peak = *std::max_element(t.logits.begin(), t.logits.end());
    double denom = 0;
    t.probs.resize(t.logits.size());
    for (std::size_t c = 0; c < t.logits.size(); ++c) {
        t.probs[c] = std::exp(t.logits[c] - peak);
        denom += t.probs[c];
    }
    for (auto& p : t.probs) p /= denom;

    if (true_class >= 0) t.loss = -std::log(std::max(t.probs[static_cast<std::size_t>(true_class)], 1e-12));
    return t;
}

NumericGradients finite_diff_grads(const NetDims& d, const ParamArrays<double>& w, std::span<const double> input,
                                   int true_class, const NumericPolicy& policy, double h) {
    const Trace base = forward(d, w, input, policy, true_class);
    const auto base_regime = regime(base, policy);

    NumericGradients out;
    out.grads = ParamArrays<double>::zeros(d);
    out.masked.assign(w.total(), false);
    for (double z : base.conv1_pre) out.saturated_units += std::abs(z) > policy.preact_clip;
    for (double z : base.conv2_pre) out.saturated_units += std::abs(z) > policy.preact_clip;

    ParamArrays<double> probe = w;
    for (std::size_t p = 0; p < out.masked.size(); ++p) {
        const double original = probe.at(p);
        probe.at(p) = original + h;
        const Trace plus = forward(d, probe, input, policy, true_class);
        probe.at(p) = original - h;
        const Trace minus = forward(d, probe, input, policy, true_class);
        probe.at(p) = original;

        out.grads.at(p) = (plus.loss - minus.loss) / (2 * h);
        // Saturated units have zero true slope but are passed through by the
        // backward pass, so a saturated base point is excluded wholesale.
        if (out.saturated_units > 0 || regime(plus, policy) != base_regime || regime(minus, policy) != base_regime) {
            out.masked[p] = true;
            ++out.masked_count;
        }
    }
    return out;
}

GradCheckSummary compare(const ParamArrays<double>& analytic, const NumericGradients& numeric, double floor) {
    GradCheckSummary s;
    s.draws = 1;
    auto a = analytic;
    auto n = numeric.grads;
    for (std::size_t p = 0; p < numeric.masked.size(); ++p) {
        if (numeric.masked[p]) {
            ++s.masked;
            continue;
        }
        const double rel = std::abs(a.at(p) - n.at(p)) / std::max(std::abs(n.at(p)), floor);
        if (rel > s.max_rel_error) {
            s.max_rel_error = rel;
            s.worst_param = p;
        }
        ++s.compared;
    }
    return s;
}

GradCheckSummary run_gradcheck(const NetConfig& cfg, std::size_t draws, std::uint64_t seed,
                               const NumericPolicy& policy, double h) {
    const NetDims d = derive_dims(cfg);
    Rng rng(seed);
    GradCheckSummary total;
    for (std::size_t k = 0; k < draws; ++k) {
        auto w = he_init(d, rng.next()).cast<double>();
        for (auto* b : {&w.conv1_b, &w.conv2_b, &w.output_b}) {
            for (auto& v : *b) v = static_cast<float>(0.1 * rng.normal());
        }
        std::vector<double> input(d.input_len());
        for (auto& v : input) v = static_cast<float>(rng.uniform());
        const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.num_classes)));

        auto acts = ActivationSet<double>::allocate(d);
        auto grads = GradientSet<double>::allocate(d);
        forward_pass<double>(d, input, w, policy, acts);
        backward_image<double>(d, acts, input, label, w, grads, policy);

        const auto numeric = finite_diff_grads(d, w, input, label, policy, h);
        const auto s = compare(grads.accum, numeric);
        if (s.max_rel_error >= total.max_rel_error) {
            total.max_rel_error = s.max_rel_error;
            total.worst_param = s.worst_param;
        }
        total.compared += s.compared;
        total.masked += s.masked;
        ++total.draws;
    }
    return total;
}

}  // namespace tinycnn::oracle
