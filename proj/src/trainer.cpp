#include "tinycnn/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include <nlohmann/json.hpp>

#include "tinycnn/forward.hpp"
#include "tinycnn/numcore.hpp"
#include "tinycnn/rng.hpp"

namespace tinycnn {

std::vector<Sample> load_samples(std::span<const LabeledPath> items, ImageLoader& loader) {
    std::vector<Sample> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back({loader.load(item.path), item.label});
    return out;
}

TrainState TrainState::create(const NetDims& d, WeightSet weights, WeightOrigin origin) {
    return {d, std::move(weights), GradientSet<float>::allocate(d), AdamState::fresh(d), origin};
}

void average_accumulators(GradientSet<float>& grads, std::size_t images) {
    const auto n = static_cast<float>(images);
    for (auto* a : grads.accum.arrays()) {
        for (auto& g : *a) g /= n;
    }
}

TrainReport train(std::span<const Sample> train_set, std::span<const Sample> validation_set, TrainState& state,
                  const TrainConfig& cfg, const NumericPolicy& policy, const TrainHooks& hooks) {
    cfg.validate();
    TrainReport report;
    report.origin = state.origin;

    const NetDims& d = state.dims;
    auto acts = ActivationSet<float>::allocate(d);
    const std::size_t n = train_set.size();
    const auto batch = static_cast<std::size_t>(cfg.batch_size);
    const int batches = static_cast<int>((n + batch - 1) / batch);

    for (int epoch = 0; epoch < cfg.epochs && !report.interrupted; ++epoch) {
        if (hooks.on_epoch) hooks.on_epoch(epoch + 1, cfg.epochs);

        std::vector<std::size_t> order(n);
        if (cfg.shuffle_enabled) {
            order = Rng(cfg.shuffle_seed ^ static_cast<std::uint64_t>(epoch)).permutation(n);
        } else {
            std::iota(order.begin(), order.end(), std::size_t{0});
        }

        double loss_sum = 0;
        std::size_t correct = 0;
        std::size_t seen = 0;
        for (int b = 0; b < batches; ++b) {
            zero_batch_grads(state.grads);
            const std::size_t begin = static_cast<std::size_t>(b) * batch;
            const std::size_t end = std::min(n, begin + batch);
            for (std::size_t j = begin; j < end; ++j) {
                const Sample& s = train_set[order[j]];
                const auto probs = forward_pass<float>(d, s.input, state.weights, policy, acts);
                loss_sum += cross_entropy<float>(probs, s.label);
                if (argmax(probs) == s.label) ++correct;
                ++seen;
                backward_image<float>(d, acts, s.input, s.label, state.weights, state.grads, policy);

                ++report.images_processed;
                if (report.images_processed % 3 == 0 && hooks.interrupt && hooks.interrupt()) {
                    zero_batch_grads(state.grads);
                    report.interrupted = true;
                    break;
                }
            }
            if (report.interrupted) break;

            average_accumulators(state.grads, end - begin);
            adam_step(state.weights, state.grads.accum, state.adam, cfg, policy);

            BatchRecord rec;
            rec.epoch = epoch + 1;
            rec.batch = b + 1;
            rec.batches = batches;
            rec.loss = loss_sum / static_cast<double>(seen);
            rec.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(seen);
            rec.step = state.adam.step;
            report.batches.push_back(rec);
            if (hooks.on_batch) hooks.on_batch(rec);
        }
        if (seen > 0) report.final_train_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(seen);
    }

    if (!report.interrupted) {
        report.validation = evaluate(validation_set, d, state.weights, policy);
        report.validation_accuracy = report.validation.accuracy;
    }
    return report;
}

EvalResult evaluate(std::span<const Sample> samples, const NetDims& d, const WeightSet& weights,
                    const NumericPolicy& policy) {
    const auto C = static_cast<std::size_t>(d.cfg.num_classes);
    EvalResult r;
    r.confusion.assign(C, std::vector<std::size_t>(C, 0));
    auto acts = ActivationSet<float>::allocate(d);
    for (const auto& s : samples) {
        const int pred = argmax(forward_pass<float>(d, s.input, weights, policy, acts));
        ++r.confusion[static_cast<std::size_t>(s.label)][static_cast<std::size_t>(pred)];
        if (pred == s.label) ++r.correct;
        ++r.images;
    }
    if (r.images > 0) r.accuracy = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.images);
    return r;
}

std::string format_batch_line(const BatchRecord& rec) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "Batch %d/%d - Loss: %.4f - Acc: %.1f%%", rec.batch, rec.batches, rec.loss,
                  rec.accuracy);
    return buf;
}

std::string batch_record_json(const BatchRecord& rec) {
    nlohmann::ordered_json j;
    j["epoch"] = rec.epoch;
    j["batch"] = rec.batch;
    j["batches"] = rec.batches;
    j["loss"] = rec.loss;
    j["accuracy"] = rec.accuracy;
    j["step"] = rec.step;
    return j.dump();
}

}  // namespace tinycnn
