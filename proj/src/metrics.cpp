#include "liteshield/metrics.hpp"

#include "liteshield/error.hpp"
#include "liteshield/parallel.hpp"
#include "liteshield/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace liteshield {

namespace {

double ratio(double num, double den) {
    return den > 0.0 ? num / den : 0.0;
}

}  // namespace

ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred, int n_classes,
                          std::vector<std::string> class_names) {
    if (y_true.size() != y_pred.size()) {
        throw DataError("label vectors differ in length (" + std::to_string(y_true.size()) + " vs " +
                        std::to_string(y_pred.size()) + ")");
    }
    if (n_classes < 1) throw DataError("confusion matrix needs at least one class");
    if (!class_names.empty() && static_cast<int>(class_names.size()) != n_classes) {
        throw DataError("class name count does not match n_classes");
    }
    ConfusionMatrix cm;
    cm.counts = decltype(cm.counts)::Zero(n_classes, n_classes);
    for (Eigen::Index i = 0; i < y_true.size(); ++i) {
        const int t = y_true(i);
        const int p = y_pred(i);
        if (t < 0 || t >= n_classes || p < 0 || p >= n_classes) {
            throw DataError("label out of range at position " + std::to_string(i));
        }
        ++cm.counts(t, p);
    }
    if (class_names.empty()) {
        for (int c = 0; c < n_classes; ++c) class_names.push_back(std::to_string(c));
    }
    cm.class_names = std::move(class_names);
    return cm;
}

QualityReport quality(const ConfusionMatrix& cm, Task task) {
    const std::int64_t total = cm.total();
    if (total <= 0) throw DataError("confusion matrix is empty");
    if (task == Task::binary && cm.n_classes() != 2) throw DataError("binary quality needs a 2-class matrix");

    const int k = cm.n_classes();
    const double n = static_cast<double>(total);
    QualityReport q;
    q.precision.resize(static_cast<std::size_t>(k));
    q.recall.resize(static_cast<std::size_t>(k));
    q.f1.resize(static_cast<std::size_t>(k));
    q.class_fpr.resize(static_cast<std::size_t>(k));

    std::int64_t correct = 0;
    for (int c = 0; c < k; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        const double tp = static_cast<double>(cm.counts(c, c));
        const double support = static_cast<double>(cm.counts.row(c).sum());
        const double predicted = static_cast<double>(cm.counts.col(c).sum());
        const double fp = predicted - tp;
        const double negatives = n - support;
        correct += cm.counts(c, c);

        q.precision[uc] = ratio(tp, predicted);
        q.recall[uc] = ratio(tp, support);
        q.f1[uc] = ratio(2.0 * q.precision[uc] * q.recall[uc], q.precision[uc] + q.recall[uc]);
        q.class_fpr[uc] = ratio(fp, negatives);

        q.macro_precision += q.precision[uc];
        q.macro_recall += q.recall[uc];
        q.macro_f1 += q.f1[uc];
        q.weighted_precision += support * q.precision[uc];
        q.weighted_f1 += support * q.f1[uc];
    }
    q.macro_precision /= k;
    q.macro_recall /= k;
    q.macro_f1 /= k;
    q.weighted_precision /= n;
    q.weighted_f1 /= n;
    q.accuracy = static_cast<double>(correct) / n;
    // Σ support·(tp/support)/n collapses to Σ tp / n.
    q.weighted_recall = q.accuracy;

    if (task == Task::binary) {
        const double fp = static_cast<double>(cm.counts(0, 1));
        const double tn = static_cast<double>(cm.counts(0, 0));
        q.fpr = ratio(fp, fp + tn);
    } else {
        double sum = 0.0;
        for (double v : q.class_fpr) sum += v;
        q.fpr = sum / k;
    }
    q.specificity = 1.0 - q.fpr;
    return q;
}

CostReport profile_cost(const TrainedModel& model, const Matrix& probe, int repeats) {
    if (probe.rows() == 0) throw DataError("profiling probe is empty");
    if (repeats < 3) throw UsageError("profiling needs at least 3 repeats");

    CostReport report;
    report.model_size_bytes = serialize(model).size();
    report.accounted_memory_bytes = model.accounted_bytes();

    ThreadLimitGuard single_thread(1);
    for (int i = 0; i < 3; ++i) (void)model.predict(probe);

    using Clock = std::chrono::steady_clock;
    std::vector<double> per_sample;
    per_sample.reserve(static_cast<std::size_t>(repeats));
    for (int i = 0; i < repeats; ++i) {
        const auto start = Clock::now();
        const Labels out = model.predict(probe);
        const auto stop = Clock::now();
        (void)out;
        per_sample.push_back(std::chrono::duration<double>(stop - start).count() / static_cast<double>(probe.rows()));
    }
    std::sort(per_sample.begin(), per_sample.end());
    const std::size_t m = per_sample.size();
    report.latency_median_s = m % 2 ? per_sample[m / 2] : 0.5 * (per_sample[m / 2 - 1] + per_sample[m / 2]);
    // Nearest-rank percentile.
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(m)));
    report.latency_p95_s = per_sample[std::max<std::size_t>(rank, 1) - 1];
    return report;
}

}  // namespace liteshield
