#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "test_util.hpp"
#include "tinycnn/error.hpp"
#include "tinycnn/numcore.hpp"
#include "tinycnn/trainer.hpp"

using namespace tinycnn;
using tinycnn::test::random_vector;
using tinycnn::test::same_bits;

namespace {

NetDims dims_for(int input) {
    NetConfig c;
    c.input_size = input;
    return derive_dims(c);
}

std::vector<Sample> random_samples(const NetDims& d, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Sample> out;
    for (std::size_t k = 0; k < n; ++k) {
        out.push_back({random_vector(d.input_len(), rng.next()), static_cast<int>(k % 3)});
    }
    return out;
}

TrainConfig quiet_config(int epochs, int batch, bool shuffle) {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = batch;
    cfg.shuffle_enabled = shuffle;
    return cfg;
}

// One Adam step over samples[begin, end) done by hand.
void manual_batch(const NetDims& d, std::span<const Sample> samples, WeightSet& w, AdamState& adam,
                  const TrainConfig& cfg) {
    auto g = GradientSet<float>::allocate(d);
    auto acts = ActivationSet<float>::allocate(d);
    for (const auto& s : samples) {
        forward_pass<float>(d, s.input, w, NumericPolicy{}, acts);
        backward_image<float>(d, acts, s.input, s.label, w, g, NumericPolicy{});
    }
    for (auto* a : g.accum.arrays()) {
        for (auto& v : *a) v /= static_cast<float>(samples.size());
    }
    adam_step(w, g.accum, adam, cfg, NumericPolicy{});
}

}  // namespace

TEST(Train, OneBatchMatchesManualAdamStep) {
    const NetDims d = dims_for(16);
    const auto samples = random_samples(d, 6, 1);
    const auto init = he_init(d, 2);
    auto state = TrainState::create(d, init, WeightOrigin::FromHeInit);
    const auto cfg = quiet_config(1, 6, false);
    train(samples, {}, state, cfg, NumericPolicy{});

    auto w = init;
    auto adam = AdamState::fresh(d);
    manual_batch(d, samples, w, adam, cfg);
    EXPECT_TRUE(same_bits(state.weights, w));
    EXPECT_EQ(state.adam.step, 1u);
    EXPECT_EQ(state.grads.stats.accumulator_zeroings, 1u);
    EXPECT_EQ(state.grads.stats.propagation_zeroings, 6u);
}

TEST(Train, PartialLastBatchAveragesOverItsOwnSize) {
    const NetDims d = dims_for(16);
    const auto samples = random_samples(d, 8, 3);
    const auto init = he_init(d, 4);
    auto state = TrainState::create(d, init, WeightOrigin::FromHeInit);
    const auto cfg = quiet_config(1, 6, false);
    const auto report = train(samples, {}, state, cfg, NumericPolicy{});
    ASSERT_EQ(report.batches.size(), 2u);
    EXPECT_EQ(report.batches[1].batches, 2);

    auto w = init;
    auto adam = AdamState::fresh(d);
    manual_batch(d, std::span(samples).subspan(0, 6), w, adam, cfg);
    manual_batch(d, std::span(samples).subspan(6, 2), w, adam, cfg);
    EXPECT_TRUE(same_bits(state.weights, w));
    EXPECT_EQ(state.grads.stats.accumulator_zeroings, 2u);
}

TEST(Train, InterruptPolledEveryThirdImageAndDiscardsPartialBatch) {
    const NetDims d = dims_for(16);
    const auto samples = random_samples(d, 12, 5);
    auto state = TrainState::create(d, he_init(d, 6), WeightOrigin::FromHeInit);
    const auto cfg = quiet_config(3, 4, true);

    int polls = 0;
    WeightSet after_first_batch;
    TrainHooks hooks;
    hooks.interrupt = [&] {
        ++polls;
        return polls == 2;  // the poll after image 6, in the middle of batch 2
    };
    hooks.on_batch = [&](const BatchRecord& r) {
        if (r.batch == 1 && r.epoch == 1) after_first_batch = state.weights;
    };
    const auto report = train(samples, samples, state, cfg, NumericPolicy{}, hooks);
    EXPECT_TRUE(report.interrupted);
    EXPECT_EQ(polls, 2);
    EXPECT_EQ(report.images_processed, 6u);
    EXPECT_EQ(report.batches.size(), 1u);
    EXPECT_EQ(state.adam.step, 1u);
    EXPECT_TRUE(same_bits(state.weights, after_first_batch));
    EXPECT_FALSE(report.validation_accuracy.has_value());
    EXPECT_EQ(report.validation.images, 0u);
    EXPECT_EQ(state.grads.accum, ParamArrays<float>::zeros(d));
}

TEST(Train, PollCountFollowsSessionImageCount) {
    const NetDims d = dims_for(8);
    const auto samples = random_samples(d, 7, 6);
    auto state = TrainState::create(d, he_init(d, 6), WeightOrigin::FromHeInit);
    int polls = 0;
    TrainHooks hooks;
    hooks.interrupt = [&] { return ++polls < 0; };
    const auto report = train(samples, {}, state, quiet_config(3, 6, true), NumericPolicy{}, hooks);
    EXPECT_FALSE(report.interrupted);
    EXPECT_EQ(report.images_processed, 21u);
    EXPECT_EQ(polls, 7);  // counted across epochs, not reset per epoch
}

TEST(Train, SingleImageOverfits) {
    const NetDims d = dims_for(64);
    auto samples = random_samples(d, 1, 8);
    samples[0].label = 2;
    auto state = TrainState::create(d, he_init(d, 42), WeightOrigin::FromHeInit);
    const auto report = train(samples, {}, state, quiet_config(50, 6, true), NumericPolicy{});
    ASSERT_EQ(report.batches.size(), 50u);
    EXPECT_LT(report.batches.back().loss, 0.01);
    EXPECT_EQ(report.final_train_accuracy, 100.0);
    // After the first few steps the loss only goes down.
    for (std::size_t k = 5; k < report.batches.size(); ++k) {
        EXPECT_LE(report.batches[k].loss, report.batches[k - 1].loss + 1e-6) << k;
    }
}

TEST(Train, DeterministicForFixedSeed) {
    const NetDims d = dims_for(16);
    const auto samples = random_samples(d, 10, 9);
    const auto cfg = quiet_config(3, 4, true);
    auto a = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    auto b = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    const auto ra = train(samples, samples, a, cfg, NumericPolicy{});
    const auto rb = train(samples, samples, b, cfg, NumericPolicy{});
    EXPECT_TRUE(same_bits(a.weights, b.weights));
    EXPECT_EQ(ra.batches, rb.batches);

    auto unshuffled = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    train(samples, {}, unshuffled, quiet_config(3, 4, false), NumericPolicy{});
    EXPECT_FALSE(same_bits(a.weights, unshuffled.weights));
}

TEST(Train, ShuffleSeedChangesOrder) {
    const NetDims d = dims_for(16);
    const auto samples = random_samples(d, 10, 9);
    auto cfg = quiet_config(1, 4, true);
    auto a = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    train(samples, {}, a, cfg, NumericPolicy{});
    cfg.shuffle_seed = 43;
    auto b = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    train(samples, {}, b, cfg, NumericPolicy{});
    EXPECT_FALSE(same_bits(a.weights, b.weights));
}

TEST(Train, NonFiniteInputRaisesNumericFault) {
    const NetDims d = dims_for(8);
    auto samples = random_samples(d, 3, 1);
    samples[1].input[0] = std::numeric_limits<float>::quiet_NaN();
    auto state = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    EXPECT_THROW(train(samples, {}, state, quiet_config(1, 6, false), NumericPolicy{}), NumericFault);
}

TEST(Train, InvalidConfigRejected) {
    const NetDims d = dims_for(8);
    auto state = TrainState::create(d, he_init(d, 1), WeightOrigin::FromHeInit);
    EXPECT_THROW(train({}, {}, state, quiet_config(1, 0, false), NumericPolicy{}), ConfigError);
}

TEST(Train, RecordsTrackProgress) {
    const NetDims d = dims_for(8);
    const auto samples = random_samples(d, 13, 2);
    auto state = TrainState::create(d, he_init(d, 1), WeightOrigin::FromBaked);
    std::vector<int> epochs_seen;
    TrainHooks hooks;
    hooks.on_epoch = [&](int e, int total) {
        epochs_seen.push_back(e);
        EXPECT_EQ(total, 2);
    };
    const auto report = train(samples, samples, state, quiet_config(2, 6, true), NumericPolicy{}, hooks);
    EXPECT_EQ(epochs_seen, (std::vector<int>{1, 2}));
    EXPECT_EQ(report.origin, WeightOrigin::FromBaked);
    ASSERT_EQ(report.batches.size(), 6u);
    for (std::size_t k = 0; k < report.batches.size(); ++k) {
        EXPECT_EQ(report.batches[k].step, k + 1);
        EXPECT_EQ(report.batches[k].batch, static_cast<int>(k % 3) + 1);
        EXPECT_EQ(report.batches[k].batches, 3);
        EXPECT_TRUE(std::isfinite(report.batches[k].loss));
        EXPECT_GE(report.batches[k].accuracy, 0.0);
        EXPECT_LE(report.batches[k].accuracy, 100.0);
    }
    ASSERT_TRUE(report.validation_accuracy.has_value());
    EXPECT_EQ(report.validation.images, 13u);
}

TEST(Evaluate, EmptySetHasNoAccuracy) {
    const NetDims d = dims_for(8);
    const auto r = evaluate({}, d, he_init(d, 1), NumericPolicy{});
    EXPECT_EQ(r.images, 0u);
    EXPECT_FALSE(r.accuracy.has_value());
}

TEST(Evaluate, ConfusionCountsAndTieRule) {
    const NetDims d = dims_for(8);
    // All-zero weights give uniform probabilities: every prediction is class 0.
    const auto w = WeightSet::zeros(d);
    const auto samples = random_samples(d, 6, 4);
    const auto r = evaluate(samples, d, w, NumericPolicy{});
    EXPECT_EQ(r.images, 6u);
    EXPECT_EQ(r.correct, 2u);
    ASSERT_TRUE(r.accuracy.has_value());
    EXPECT_NEAR(*r.accuracy, 100.0 / 3, 1e-12);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(r.confusion[t][0], 2u);
}

TEST(Logging, BatchLineAndJson) {
    const BatchRecord rec{2, 3, 5, 0.123456, 66.6666, 13};
    EXPECT_EQ(format_batch_line(rec), "Batch 3/5 - Loss: 0.1235 - Acc: 66.7%");
    EXPECT_EQ(batch_record_json(rec),
              R"({"epoch":2,"batch":3,"batches":5,"loss":0.123456,"accuracy":66.6666,"step":13})");
}

TEST(Average, DividesEveryAccumulator) {
    const NetDims d = dims_for(8);
    auto g = GradientSet<float>::allocate(d);
    for (std::size_t p = 0; p < g.accum.total(); ++p) g.accum.at(p) = 6.0f;
    average_accumulators(g, 4);
    for (std::size_t p = 0; p < g.accum.total(); ++p) EXPECT_EQ(g.accum.at(p), 1.5f);
}
