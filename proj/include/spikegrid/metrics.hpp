#pragma once

#include <cstdint>
#include <vector>

#include "spikegrid/errors.hpp"

namespace spikegrid {

struct ConfusionMatrix {
    int num_classes = 0;
    std::vector<std::int64_t> counts;  // [K*K], rows = true class, cols = predicted

    std::int64_t at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * num_classes + pred]; }
    std::int64_t total() const;
};

struct Metrics {
    double oa = 0.0;     // trace / total
    double aa = 0.0;     // mean per-class recall
    double kappa = 0.0;  // (p_o - p_e) / (1 - p_e)
    std::vector<double> per_class_accuracy;
};

// predictions/truths carry 1-based class labels in 1..K.
std::pair<ConfusionMatrix, Metrics> evaluate(const std::vector<int>& predictions, const std::vector<int>& truths, int k);

Metrics metrics_from_confusion(const ConfusionMatrix& cm);

}  // namespace spikegrid
