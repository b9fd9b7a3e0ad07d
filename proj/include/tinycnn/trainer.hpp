#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinycnn/backward.hpp"
#include "tinycnn/config.hpp"
#include "tinycnn/dataset.hpp"
#include "tinycnn/optimizer.hpp"
#include "tinycnn/params.hpp"
#include "tinycnn/weightstore.hpp"

namespace tinycnn {

struct Sample {
    std::vector<float> input;
    int label = 0;
};

std::vector<Sample> load_samples(std::span<const LabeledPath> items, ImageLoader& loader);

/// Weights plus everything that mutates alongside them during training.
struct TrainState {
    NetDims dims;
    WeightSet weights;
    GradientSet<float> grads;
    AdamState adam;
    WeightOrigin origin = WeightOrigin::FromHeInit;

    static TrainState create(const NetDims& d, WeightSet weights, WeightOrigin origin);
};

struct BatchRecord {
    int epoch = 0;    // 1-based
    int batch = 0;    // 1-based within the epoch
    int batches = 0;  // batches in this epoch
    double loss = 0;      // mean loss over the images seen so far this epoch
    double accuracy = 0;  // cumulative epoch training accuracy, percent
    std::uint64_t step = 0;

    bool operator==(const BatchRecord&) const = default;
};

struct EvalResult {
    std::size_t images = 0;
    std::size_t correct = 0;
    std::optional<double> accuracy;                  // percent; absent for an empty set
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

struct TrainReport {
    std::vector<BatchRecord> batches;
    double final_train_accuracy = 0;
    std::optional<double> validation_accuracy;
    EvalResult validation;
    std::size_t images_processed = 0;
    bool interrupted = false;
    WeightOrigin origin = WeightOrigin::FromHeInit;
};

struct TrainHooks {
    /// Polled after every third training image of the session; true stops training.
    std::function<bool()> interrupt;
    std::function<void(int epoch, int epochs)> on_epoch;
    std::function<void(const BatchRecord&)> on_batch;
};

/// Divides every accumulator by the number of images in the batch.
void average_accumulators(GradientSet<float>& grads, std::size_t images);

/// Epoch/batch loop with per-batch gradient zeroing, per-batch Adam steps and
/// a final forward-only validation pass. On interrupt the partial batch is
/// discarded and the weights stay at the last completed batch. NumericFault
/// propagates with the state left as it was when the fault was detected.
TrainReport train(std::span<const Sample> train_set, std::span<const Sample> validation_set, TrainState& state,
                  const TrainConfig& cfg, const NumericPolicy& policy, const TrainHooks& hooks = {});

/// Top-1 accuracy and confusion counts; argmax ties go to the lowest class.
EvalResult evaluate(std::span<const Sample> samples, const NetDims& d, const WeightSet& weights,
                    const NumericPolicy& policy);

/// "Batch B/N - Loss: X - Acc: Y%"
std::string format_batch_line(const BatchRecord& record);
/// One JSON object per line for the machine-readable report.
std::string batch_record_json(const BatchRecord& record);

}  // namespace tinycnn
