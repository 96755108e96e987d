#pragma once

#include "liteshield/models.hpp"
#include "liteshield/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace liteshield {

struct ConfusionMatrix {
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // rows true, columns predicted
    std::vector<std::string> class_names;

    int n_classes() const noexcept { return static_cast<int>(counts.rows()); }
    std::int64_t total() const { return counts.sum(); }
};

// Throws DataError on length mismatch or out-of-range labels.
ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred, int n_classes,
                          std::vector<std::string> class_names = {});

struct QualityReport {
    double accuracy = 0.0;
    std::vector<double> precision;  // per class
    std::vector<double> recall;
    std::vector<double> f1;
    std::vector<double> class_fpr;  // one-vs-rest
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    // Binary: FP/(FP+TN) with attack (class 1) positive. Multiclass: mean one-vs-rest FPR.
    double fpr = 0.0;
    double specificity = 0.0;  // 1 - fpr
};

// Zero denominators give 0. Weighted averages use true-class supports.
QualityReport quality(const ConfusionMatrix& cm, Task task);

struct CostReport {
    std::size_t model_size_bytes = 0;
    double latency_median_s = 0.0;  // per sample
    double latency_p95_s = 0.0;
    std::size_t accounted_memory_bytes = 0;
};

// Three untimed warm-up passes, then `repeats` timed single-threaded
// full-batch predictions on a steady clock.
CostReport profile_cost(const TrainedModel& model, const Matrix& probe, int repeats = 30);

}  // namespace liteshield
