#include "spikegrid/train.hpp"

#include <algorithm>
#include <cmath>

#include "spikegrid/parallel.hpp"

namespace spikegrid {

void TrainConfig::validate() const {
    if (learning_rate < 0.0f) throw ConfigError("TrainConfig: learning_rate must be non-negative");
    if (!(lr_decay_factor > 0.0f && lr_decay_factor <= 1.0f)) throw ConfigError("TrainConfig: lr_decay_factor in (0,1]");
    if (lr_decay_every < 1) throw ConfigError("TrainConfig: lr_decay_every must be >= 1");
    if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
    if (momentum < 0.0f || momentum >= 1.0f) throw ConfigError("TrainConfig: momentum must be in [0,1)");
    if (time_steps < 1) throw ConfigError("TrainConfig: time_steps must be >= 1");
    if (patch_size < 5 || patch_size % 2 == 0) throw ConfigError("TrainConfig: patch_size must be odd and >= 5");
    surrogate.validate();
}

std::pair<float, Tensor> cross_entropy_loss(const Tensor& logits, int true_class_index) {
    const int k = static_cast<int>(logits.size());
    if (k < 2) throw ShapeError("cross_entropy_loss: need at least two classes");
    if (true_class_index < 0 || true_class_index >= k) throw DataError("cross_entropy_loss: class index out of range");
    double m = logits[0];
    for (int i = 1; i < k; ++i) m = std::max(m, static_cast<double>(logits[i]));
    double z = 0.0;
    for (int i = 0; i < k; ++i) z += std::exp(static_cast<double>(logits[i]) - m);
    const double log_z = std::log(z);
    const double loss = -(static_cast<double>(logits[true_class_index]) - m - log_z);
    Tensor d = Tensor::zeros({k});
    for (int i = 0; i < k; ++i) {
        const double soft = std::exp(static_cast<double>(logits[i]) - m - log_z);
        d[i] = static_cast<float>(soft - (i == true_class_index ? 1.0 : 0.0));
    }
    return {static_cast<float>(loss), std::move(d)};
}

std::pair<float, Tensor> mse_loss(const Tensor& logits, int true_class_index) {
    const int k = static_cast<int>(logits.size());
    if (k < 2) throw ShapeError("mse_loss: need at least two classes");
    if (true_class_index < 0 || true_class_index >= k) throw DataError("mse_loss: class index out of range");
    double loss = 0.0;
    Tensor d = Tensor::zeros({k});
    for (int i = 0; i < k; ++i) {
        const double err = static_cast<double>(logits[i]) - (i == true_class_index ? 1.0 : 0.0);
        loss += err * err;
        d[i] = static_cast<float>(2.0 * err / k);
    }
    return {static_cast<float>(loss / k), std::move(d)};
}

std::pair<float, Tensor> compute_loss(LossKind kind, const Tensor& logits, int true_class_index) {
    return kind == LossKind::CrossEntropy ? cross_entropy_loss(logits, true_class_index)
                                          : mse_loss(logits, true_class_index);
}

float lr_at_epoch(const TrainConfig& cfg, int epoch) {
    const int drops = epoch / cfg.lr_decay_every;
    return cfg.learning_rate * static_cast<float>(std::pow(static_cast<double>(cfg.lr_decay_factor), drops));
}

void sgd_step(ParamStore& params, const GradientSet& grads, std::vector<Tensor>& velocity, const TrainConfig& cfg,
              int epoch) {
    if (static_cast<int>(grads.grads.size()) != params.count()) throw ShapeError("sgd_step: gradient count mismatch");
    if (velocity.size() != grads.grads.size()) throw ShapeError("sgd_step: velocity count mismatch");
    const float lr = lr_at_epoch(cfg, epoch);
    for (int i = 0; i < params.count(); ++i) {
        const Tensor& g = grads.grads[static_cast<std::size_t>(i)];
        if (!g.all_finite()) throw TrainingError("sgd_step: non-finite gradient for parameter " + params.name(i));
        Tensor& v = velocity[static_cast<std::size_t>(i)];
        Tensor& p = params.value(i);
        require_same_shape(g, p, "sgd_step");
        for (std::size_t j = 0; j < p.data.size(); ++j) {
            v.data[j] = cfg.momentum * v.data[j] + g.data[j];
            p.data[j] -= lr * v.data[j];
        }
    }
}

PreparedData prepare_data(const HsiCube& cube, const LabelMap& labels, const SplitSpec& split_spec, int pca_components,
                          std::uint64_t seed) {
    if (cube.height != labels.height || cube.width != labels.width)
        throw DataError("prepare_data: cube and label raster sizes differ");
    Split split = stratified_split(labels, split_spec);

    PcaModel pca = fit_pca(cube, pca_components);
    Tensor reduced = pca_project(cube, pca);
    const Standardizer st = Standardizer::fit(reduced, split.train);
    st.apply_in_place(reduced);

    PreparedData data;
    data.labels = labels;
    data.num_classes = labels.num_classes;
    data.test = std::move(split.test);

    // Hold out the final tenth of the shuffled training pixels for
    // per-epoch model selection.
    std::vector<PixelCoord> train = std::move(split.train);
    Rng rng(seed);
    Rng val_rng = rng.fork(11);
    val_rng.shuffle(train);
    std::size_t n_val = train.size() / 10;
    if (n_val == 0 && train.size() > 1) n_val = 1;
    data.train_core.assign(train.begin(), train.end() - static_cast<std::ptrdiff_t>(n_val));
    data.validation.assign(train.end() - static_cast<std::ptrdiff_t>(n_val), train.end());
    data.reduced = std::move(reduced);
    return data;
}

int argmax_class(const Tensor& logits) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(logits.size()); ++i)
        if (logits[i] > logits[best]) best = i;
    return best + 1;
}

std::vector<int> predict_labels(const Network& net, const Tensor& reduced, const std::vector<PixelCoord>& coords,
                                int patch_size, int time_steps, int jobs) {
    std::vector<int> out(coords.size(), 0);
    parallel_for(static_cast<int>(coords.size()), jobs, [&](int i) {
        const auto& p = coords[static_cast<std::size_t>(i)];
        const Tensor patch = extract_patch(reduced, p.row, p.col, patch_size);
        const Tensor current = encode_direct(patch, time_steps);
        out[static_cast<std::size_t>(i)] = argmax_class(net.forward(current));
    });
    return out;
}

Metrics evaluate_pixels(const Network& net, const PreparedData& data, const std::vector<PixelCoord>& coords,
                        int patch_size, int time_steps, int jobs) {
    const std::vector<int> preds = predict_labels(net, data.reduced, coords, patch_size, time_steps, jobs);
    std::vector<int> truths(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) truths[i] = data.labels.at(coords[i].row, coords[i].col);
    return evaluate(preds, truths, data.num_classes).second;
}

namespace {

struct SampleGrad {
    GradientSet grads;
    double loss = 0.0;
};

GradientSet batch_gradients(const Network& net, const PreparedData& data, const std::vector<PixelCoord>& batch,
                            const TrainConfig& cfg, int jobs, double& mean_loss) {
    std::vector<SampleGrad> per_sample(batch.size());
    parallel_for(static_cast<int>(batch.size()), jobs, [&](int i) {
        const auto& px = batch[static_cast<std::size_t>(i)];
        const Tensor patch = extract_patch(data.reduced, px.row, px.col, cfg.patch_size);
        const Tensor current = encode_direct(patch, cfg.time_steps);
        Tape tape;
        const Tensor logits = forward_record(net, current, tape);
        const int truth = data.labels.at(px.row, px.col);
        auto [loss, d_logits] = compute_loss(cfg.loss, logits, truth - 1);
        per_sample[static_cast<std::size_t>(i)].grads = backward(tape, net, d_logits, cfg.surrogate);
        per_sample[static_cast<std::size_t>(i)].loss = loss;
    });
    // Fixed-order reduction keeps gradients identical for any worker count.
    GradientSet total = std::move(per_sample[0].grads);
    double loss_sum = per_sample[0].loss;
    for (std::size_t i = 1; i < per_sample.size(); ++i) {
        total.add_(per_sample[i].grads);
        loss_sum += per_sample[i].loss;
    }
    total.scale_(1.0f / static_cast<float>(batch.size()));
    mean_loss = loss_sum / static_cast<double>(batch.size());
    return total;
}

}  // namespace

TrainResult train(const NetworkSpec& base_spec, const PreparedData& data, const TrainConfig& cfg, int jobs) {
    cfg.validate();
    if (data.train_core.empty()) throw DataError("train: no training pixels");

    NetworkSpec spec = base_spec;
    spec.patch_size = cfg.patch_size;
    spec.time_steps = cfg.time_steps;
    spec.num_classes = data.num_classes;
    spec.input_channels = data.reduced.dim(2);
    spec.validate();

    Rng rng(cfg.seed);
    Rng init_rng = rng.fork(1);
    Network net(spec, init_rng);

    std::vector<Tensor> velocity;
    velocity.reserve(static_cast<std::size_t>(net.params().count()));
    for (const auto& e : net.params().entries) velocity.push_back(Tensor::zeros(e.value.shape));

    TrainResult result;
    result.spec = spec;

    std::vector<PixelCoord> order = data.train_core;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        Rng epoch_rng = rng.fork(1000 + static_cast<std::uint64_t>(epoch));
        epoch_rng.shuffle(order);

        double loss_acc = 0.0;
        int batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<PixelCoord> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                                order.begin() + static_cast<std::ptrdiff_t>(end));
            double mean_loss = 0.0;
            GradientSet grads = batch_gradients(net, data, batch, cfg, jobs, mean_loss);
            sgd_step(net.params(), grads, velocity, cfg, epoch);
            loss_acc += mean_loss;
            ++batches;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = lr_at_epoch(cfg, epoch);
        rec.mean_loss = batches > 0 ? loss_acc / batches : 0.0;
        if (!data.validation.empty())
            rec.validation = evaluate_pixels(net, data, data.validation, cfg.patch_size, cfg.time_steps, jobs);
        result.log.push_back(rec);

        // Ties favor the most recent epoch; late epochs at equal validation
        // accuracy are better trained.
        if (result.best_epoch < 0 || rec.validation.oa >= result.best_val_oa) {
            result.best_epoch = epoch;
            result.best_val_oa = rec.validation.oa;
            result.best_params = net.params();
        }
    }
    return result;
}

}  // namespace spikegrid
