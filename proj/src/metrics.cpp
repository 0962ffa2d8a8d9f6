#include "spikegrid/metrics.hpp"

#include <string>

namespace spikegrid {

std::int64_t ConfusionMatrix::total() const {
    std::int64_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

std::pair<ConfusionMatrix, Metrics> evaluate(const std::vector<int>& predictions, const std::vector<int>& truths, int k) {
    if (predictions.size() != truths.size()) throw DataError("evaluate: prediction/truth length mismatch");
    if (k < 1) throw DataError("evaluate: need at least one class");
    ConfusionMatrix cm{k, std::vector<std::int64_t>(static_cast<std::size_t>(k) * k, 0)};
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i], t = truths[i];
        if (p < 1 || p > k) throw DataError("evaluate: prediction " + std::to_string(p) + " out of range 1.." + std::to_string(k));
        if (t < 1 || t > k) throw DataError("evaluate: truth " + std::to_string(t) + " out of range 1.." + std::to_string(k));
        ++cm.counts[static_cast<std::size_t>(t - 1) * k + (p - 1)];
    }
    return {cm, metrics_from_confusion(cm)};
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
    const int k = cm.num_classes;
    const double total = static_cast<double>(cm.total());
    if (total <= 0.0) throw DataError("metrics: empty confusion matrix");

    Metrics m;
    double trace = 0.0;
    double p_e = 0.0;
    double recall_sum = 0.0;
    int classes_with_support = 0;
    m.per_class_accuracy.assign(static_cast<std::size_t>(k), 0.0);
    for (int c = 0; c < k; ++c) {
        double row = 0.0, col = 0.0;
        for (int j = 0; j < k; ++j) {
            row += static_cast<double>(cm.at(c, j));
            col += static_cast<double>(cm.at(j, c));
        }
        const double diag = static_cast<double>(cm.at(c, c));
        trace += diag;
        p_e += (row / total) * (col / total);
        if (row > 0.0) {
            m.per_class_accuracy[static_cast<std::size_t>(c)] = diag / row;
            recall_sum += diag / row;
            ++classes_with_support;
        }
    }
    m.oa = trace / total;
    m.aa = classes_with_support > 0 ? recall_sum / classes_with_support : 0.0;
    m.kappa = p_e < 1.0 ? (m.oa - p_e) / (1.0 - p_e) : 1.0;
    return m;
}

}  // namespace spikegrid
