#include "liteshield/featsel.hpp"

#include "liteshield/csv.hpp"
#include "liteshield/error.hpp"
#include "liteshield/metrics.hpp"
#include "liteshield/parallel.hpp"
#include "liteshield/random.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace liteshield {

std::vector<int> quantile_bins(const Eigen::Ref<const Eigen::VectorXd>& values, int bins) {
    if (bins < 2) throw UsageError("mutual information needs at least 2 bins");
    const auto n = static_cast<std::size_t>(values.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return values(static_cast<Eigen::Index>(a)) < values(static_cast<Eigen::Index>(b));
    });
    std::vector<int> out(n);
    std::size_t run_start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && values(static_cast<Eigen::Index>(order[i])) != values(static_cast<Eigen::Index>(order[i - 1]))) {
            run_start = i;
        }
        out[order[i]] = static_cast<int>((run_start * static_cast<std::size_t>(bins)) / n);
    }
    return out;
}

double discrete_mutual_information(std::span<const int> feature, std::span<const int> labels) {
    if (feature.size() != labels.size()) throw DataError("feature and label lengths differ");
    if (feature.empty()) throw DataError("mutual information of an empty sample");
    std::map<std::pair<int, int>, std::size_t> joint;
    std::map<int, std::size_t> px;
    std::map<int, std::size_t> py;
    for (std::size_t i = 0; i < feature.size(); ++i) {
        ++joint[{feature[i], labels[i]}];
        ++px[feature[i]];
        ++py[labels[i]];
    }
    const double n = static_cast<double>(feature.size());
    double mi = 0.0;
    for (const auto& [cell, count] : joint) {
        const double pxy = static_cast<double>(count) / n;
        const double pxpy = static_cast<double>(px[cell.first]) * static_cast<double>(py[cell.second]) / (n * n);
        mi += pxy * std::log2(pxy / pxpy);
    }
    // Rounding can leave a tiny negative total for independent variables.
    return std::max(0.0, mi);
}

MiScores mutual_information(const Dataset& data, int bins) {
    if (data.rows() == 0 || data.dims() == 0) throw DataError("mutual information of an empty dataset");
    if (bins < 2) throw UsageError("mutual information needs at least 2 bins");
    MiScores out;
    out.bins = bins;
    out.scores.resize(static_cast<std::size_t>(data.dims()));
    const std::vector<int> labels(data.labels.data(), data.labels.data() + data.labels.size());
    parallel_for(out.scores.size(), [&](std::size_t j) {
        const auto binned = quantile_bins(data.features.col(static_cast<Eigen::Index>(j)), bins);
        out.scores[j] = discrete_mutual_information(binned, labels);
    });
    return out;
}

FeatureSubset rank_by_mi(const MiScores& scores, int keep) {
    const auto d = static_cast<int>(scores.scores.size());
    if (keep < 1 || keep > d) {
        throw UsageError("keep must lie in [1, " + std::to_string(d) + "], got " + std::to_string(keep));
    }
    std::vector<int> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scores.scores[static_cast<std::size_t>(a)] > scores.scores[static_cast<std::size_t>(b)];
    });
    FeatureSubset out;
    out.indices.assign(order.begin(), order.begin() + keep);
    for (int i : out.indices) out.mi_scores.push_back(scores.scores[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<int> stratified_folds(const Labels& labels, int n_classes, int folds, std::uint64_t seed) {
    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(n_classes));
    for (Eigen::Index i = 0; i < labels.size(); ++i) members.at(static_cast<std::size_t>(labels(i))).push_back(i);
    std::vector<int> fold(static_cast<std::size_t>(labels.size()), 0);
    Rng rng(seed);
    std::size_t offset = 0;
    for (auto& m : members) {
        shuffle(std::span(m), rng);
        // Continue dealing where the previous class stopped so fold sizes stay even.
        for (std::size_t i = 0; i < m.size(); ++i) {
            fold[static_cast<std::size_t>(m[i])] = static_cast<int>((offset + i) % static_cast<std::size_t>(folds));
        }
        offset += m.size();
    }
    return fold;
}

Dataset project(const Dataset& data, const FeatureSubset& subset) {
    Dataset out;
    out.labels = data.labels;
    out.class_names = data.class_names;
    out.task = data.task;
    out.features.resize(data.rows(), static_cast<Eigen::Index>(subset.indices.size()));
    for (std::size_t j = 0; j < subset.indices.size(); ++j) {
        const int src = subset.indices[j];
        if (src < 0 || src >= data.dims()) {
            throw DataError("feature index " + std::to_string(src) + " out of range for " +
                            std::to_string(data.dims()) + " features");
        }
        out.features.col(static_cast<Eigen::Index>(j)) = data.features.col(src);
        out.feature_names.push_back(data.feature_names[static_cast<std::size_t>(src)]);
    }
    return out;
}

FeatureSubset rfecv(const Dataset& full, const FeatureSubset& start, const RfecvOptions& options) {
    if (options.folds < 2) throw UsageError("rfecv needs at least 2 folds");
    if (start.indices.empty()) throw UsageError("rfecv needs a non-empty starting subset");
    if (!start.mi_scores.empty() && start.mi_scores.size() != start.indices.size()) {
        throw UsageError("starting subset scores do not match indices");
    }
    const int start_size = static_cast<int>(start.indices.size());
    if (options.force_size && (*options.force_size < 1 || *options.force_size > start_size)) {
        throw UsageError("force_size " + std::to_string(*options.force_size) + " outside [1, " +
                         std::to_string(start_size) + "]");
    }

    const Dataset data = stratified_subset(full, options.max_rows, derive_seed(options.seed, 0x5ab5));
    const auto counts = data.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0 && counts[c] < static_cast<std::size_t>(options.folds)) {
            throw DataError("stratification impossible: class '" + data.class_names[c] + "' has " +
                            std::to_string(counts[c]) + " samples for " + std::to_string(options.folds) + " folds");
        }
    }

    const auto fold_of = stratified_folds(data.labels, data.n_classes(), options.folds, options.seed);
    struct Fold {
        std::vector<Eigen::Index> train, valid;
    };
    std::vector<Fold> folds(static_cast<std::size_t>(options.folds));
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (int f = 0; f < options.folds; ++f) {
            auto& fold = folds[static_cast<std::size_t>(f)];
            (fold_of[static_cast<std::size_t>(i)] == f ? fold.valid : fold.train).push_back(i);
        }
    }

    // alive holds positions into start.indices, kept in start order.
    std::vector<int> alive(static_cast<std::size_t>(start_size));
    std::iota(alive.begin(), alive.end(), 0);
    std::vector<std::vector<int>> alive_at(static_cast<std::size_t>(start_size) + 1);
    FeatureSubset out;
    out.forced_size = options.force_size;

    while (!alive.empty()) {
        const auto size = static_cast<int>(alive.size());
        alive_at[static_cast<std::size_t>(size)] = alive;

        FeatureSubset current;
        for (int pos : alive) current.indices.push_back(start.indices[static_cast<std::size_t>(pos)]);
        const Dataset view = project(data, current);

        ForestOptions wrapper = options.wrapper;
        if (wrapper.tree.max_features == 0) wrapper.tree.max_features = sqrt_features(size);

        double score_sum = 0.0;
        std::vector<double> importance(static_cast<std::size_t>(size), 0.0);
        for (int f = 0; f < options.folds; ++f) {
            const auto& fold = folds[static_cast<std::size_t>(f)];
            const Dataset train = select_rows(view, fold.train);
            const Dataset valid = select_rows(view, fold.valid);
            std::vector<double> fold_importance;
            const auto forest = RandomForest::grow(train.features, train.labels, data.n_classes(), wrapper,
                                                   derive_seed(options.seed, static_cast<std::uint64_t>(f) + 1),
                                                   &fold_importance);
            Labels predicted(valid.rows());
            std::vector<int> votes(static_cast<std::size_t>(data.n_classes()));
            for (Eigen::Index r = 0; r < valid.rows(); ++r) predicted(r) = forest.predict_row(valid.features.row(r), votes);
            const auto cm = confusion(valid.labels, predicted, data.n_classes());
            score_sum += quality(cm, data.task == Task::binary && data.n_classes() == 2 ? Task::binary : Task::multiclass)
                             .weighted_f1;
            for (int j = 0; j < size; ++j) importance[static_cast<std::size_t>(j)] += fold_importance[static_cast<std::size_t>(j)];
        }
        out.cv_curve.emplace_back(size, score_sum / options.folds);
        if (options.on_round) options.on_round(size, out.cv_curve.back().second);
        if (size == 1) break;

        int victim = 0;
        for (int j = 1; j < size; ++j) {
            const double a = importance[static_cast<std::size_t>(j)];
            const double b = importance[static_cast<std::size_t>(victim)];
            const int idx_j = current.indices[static_cast<std::size_t>(j)];
            const int idx_v = current.indices[static_cast<std::size_t>(victim)];
            if (a < b || (a == b && idx_j > idx_v)) victim = j;
        }
        alive.erase(alive.begin() + victim);
    }

    int chosen = out.cv_curve.front().first;
    double best = out.cv_curve.front().second;
    for (const auto& [size, score] : out.cv_curve) {
        if (score > best || (score == best && size < chosen)) {
            best = score;
            chosen = size;
        }
    }
    if (options.force_size) chosen = *options.force_size;
    for (int pos : alive_at[static_cast<std::size_t>(chosen)]) {
        out.indices.push_back(start.indices[static_cast<std::size_t>(pos)]);
        if (!start.mi_scores.empty()) out.mi_scores.push_back(start.mi_scores[static_cast<std::size_t>(pos)]);
    }
    return out;
}

void write_feature_subset(std::ostream& out, const FeatureSubset& subset, const std::vector<std::string>& feature_names) {
    out << std::setprecision(17);
    for (std::size_t i = 0; i < subset.indices.size(); ++i) {
        const int idx = subset.indices[i];
        const std::string name = idx >= 0 && static_cast<std::size_t>(idx) < feature_names.size()
                                     ? feature_names[static_cast<std::size_t>(idx)]
                                     : "f" + std::to_string(idx);
        out << idx << ',' << csv_escape(name) << ',' << (i < subset.mi_scores.size() ? subset.mi_scores[i] : 0.0) << '\n';
    }
    if (subset.forced_size) out << "# forced_size," << *subset.forced_size << '\n';
    out << "# cv_curve\n";
    for (const auto& [size, score] : subset.cv_curve) out << size << ',' << score << '\n';
}

void write_feature_subset(const std::filesystem::path& path, const FeatureSubset& subset,
                          const std::vector<std::string>& feature_names) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write feature file '" + path.string() + "'");
    write_feature_subset(out, subset, feature_names);
}

FeatureSubset read_feature_subset(std::istream& in, std::vector<std::string>* names) {
    FeatureSubset subset;
    CsvReader reader(in);
    std::vector<std::string> fields;
    bool in_curve = false;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (!fields[0].empty() && fields[0].front() == '#') {
            if (fields[0] == "# cv_curve") in_curve = true;
            if (fields[0] == "# forced_size" && fields.size() == 2) subset.forced_size = std::stoi(fields[1]);
            continue;
        }
        try {
            if (in_curve) {
                if (fields.size() != 2) throw DataError("expected size,score");
                subset.cv_curve.emplace_back(std::stoi(fields[0]), std::stod(fields[1]));
            } else {
                if (fields.size() != 3) throw DataError("expected index,name,mi_score");
                subset.indices.push_back(std::stoi(fields[0]));
                if (names) names->push_back(fields[1]);
                subset.mi_scores.push_back(std::stod(fields[2]));
            }
        } catch (const std::logic_error&) {
            throw DataError("malformed feature file at line " + std::to_string(reader.line()));
        }
    }
    return subset;
}

}  // namespace liteshield
