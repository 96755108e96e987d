#pragma once

#include "liteshield/dataset.hpp"
#include "liteshield/tree.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace liteshield {

struct MiScores {
    std::vector<double> scores;  // bits, one per feature
    int bins = 32;
};

struct FeatureSubset {
    std::vector<int> indices;  // into the dataset's feature columns
    std::vector<double> mi_scores;
    std::vector<std::pair<int, double>> cv_curve;  // (subset size, mean CV weighted F1), sizes descending
    std::optional<int> forced_size;
};

// Equal-frequency bin index per value, at most `bins` distinct bins. Equal
// values always share a bin: a value's bin is derived from the sorted rank
// of its first occurrence.
std::vector<int> quantile_bins(const Eigen::Ref<const Eigen::VectorXd>& values, int bins);

// Plug-in mutual information between a discrete feature and the labels, in bits.
double discrete_mutual_information(std::span<const int> feature, std::span<const int> labels);

MiScores mutual_information(const Dataset& data, int bins = 32);

// Top `keep` features by descending score, ties to the lower index.
FeatureSubset rank_by_mi(const MiScores& scores, int keep = 30);

struct RfecvOptions {
    int folds = 5;
    std::uint64_t seed = 0;
    std::optional<int> force_size;
    ForestOptions wrapper{25, TreeOptions{16, 2, 0}, true};  // max_features 0: floor(sqrt(current size))
    std::size_t max_rows = 0;  // stratified subsample cap for the wrapper; 0 keeps every row
    std::function<void(int size, double score)> on_round;  // called after each scored subset size
};

// Recursive elimination, one feature per round, scored by stratified
// k-fold weighted F1 of the wrapper forest. Drops the feature with the lowest
// mean impurity importance (ties: the higher feature index).
FeatureSubset rfecv(const Dataset& data, const FeatureSubset& start, const RfecvOptions& options);

// Stratified fold id per row; class members are shuffled with the seed and dealt round-robin.
std::vector<int> stratified_folds(const Labels& labels, int n_classes, int folds, std::uint64_t seed);

Dataset project(const Dataset& data, const FeatureSubset& subset);

// Sidecar: `index,name,mi_score` per selected feature, then `# cv_curve` and `size,score` lines.
void write_feature_subset(std::ostream& out, const FeatureSubset& subset, const std::vector<std::string>& feature_names);
void write_feature_subset(const std::filesystem::path& path, const FeatureSubset& subset,
                          const std::vector<std::string>& feature_names);
FeatureSubset read_feature_subset(std::istream& in, std::vector<std::string>* names = nullptr);

}  // namespace liteshield
