#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spikegrid/autograd.hpp"
#include "spikegrid/metrics.hpp"
#include "spikegrid/pipeline.hpp"

namespace spikegrid {

enum class LossKind { CrossEntropy, MeanSquaredError };

struct TrainConfig {
    float learning_rate = 0.085f;
    int lr_decay_every = 25;
    float lr_decay_factor = 0.1f;
    int epochs = 100;
    int batch_size = 16;
    float momentum = 0.9f;
    std::uint64_t seed = 0;
    SurrogateSpec surrogate;
    int time_steps = 10;
    int patch_size = 17;
    LossKind loss = LossKind::CrossEntropy;

    void validate() const;
};

// Softmax cross entropy over the rate outputs; d_logits = softmax - onehot.
// true_class_index is 0-based.
std::pair<float, Tensor> cross_entropy_loss(const Tensor& logits, int true_class_index);
// Mean squared error against the one-hot target, averaged over classes.
std::pair<float, Tensor> mse_loss(const Tensor& logits, int true_class_index);
std::pair<float, Tensor> compute_loss(LossKind kind, const Tensor& logits, int true_class_index);

// Piecewise-constant schedule: lr * factor^floor(epoch / every).
float lr_at_epoch(const TrainConfig& cfg, int epoch);

// Classical momentum: v <- momentum*v + g; p <- p - lr(epoch)*v.
// Throws TrainingError (naming the parameter) on a non-finite gradient.
void sgd_step(ParamStore& params, const GradientSet& grads, std::vector<Tensor>& velocity, const TrainConfig& cfg,
              int epoch);

// Cube + labels resolved into a standardized reduced cube and pixel sets.
// PCA is fitted on the whole cube; standardization statistics come from the
// split's training pixels only. The final tenth of the (seed-shuffled)
// training pixels is held out for per-epoch model selection.
struct PreparedData {
    Tensor reduced;  // [H,W,C], standardized
    LabelMap labels;
    std::vector<PixelCoord> train_core;
    std::vector<PixelCoord> validation;
    std::vector<PixelCoord> test;
    int num_classes = 0;
};

PreparedData prepare_data(const HsiCube& cube, const LabelMap& labels, const SplitSpec& split_spec, int pca_components,
                          std::uint64_t seed);

struct EpochRecord {
    int epoch = 0;
    float lr = 0.0f;
    double mean_loss = 0.0;
    Metrics validation;
};

struct TrainResult {
    NetworkSpec spec;       // resolved spec the parameters belong to
    ParamStore best_params; // snapshot of the best validation epoch
    int best_epoch = -1;
    double best_val_oa = 0.0;
    std::vector<EpochRecord> log;
};

// Full training loop: deterministic under cfg.seed (init, shuffles, batch
// order), batch gradients averaged with a fixed-order reduction.
TrainResult train(const NetworkSpec& base_spec, const PreparedData& data, const TrainConfig& cfg, int jobs = 0);

// Classify the given pixels with a trained network; returns 1-based labels.
std::vector<int> predict_labels(const Network& net, const Tensor& reduced, const std::vector<PixelCoord>& coords,
                                int patch_size, int time_steps, int jobs = 0);

Metrics evaluate_pixels(const Network& net, const PreparedData& data, const std::vector<PixelCoord>& coords,
                        int patch_size, int time_steps, int jobs = 0);

int argmax_class(const Tensor& logits);  // 1-based

}  // namespace spikegrid
