#pragma once

#include "liteshield/dataset.hpp"
#include "liteshield/tree.hpp"
#include "liteshield/types.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <variant>

namespace liteshield {

enum class Family : std::uint8_t { dt = 0, rf = 1, knn = 2, lr = 3, nb = 4, svm = 5 };

inline constexpr std::array<Family, 6> all_families{Family::dt, Family::rf, Family::knn,
                                                    Family::lr, Family::nb, Family::svm};

std::string_view to_string(Family family);
Family parse_family(std::string_view text);

struct TreeParams {
    int max_depth = 32;
    int min_samples_split = 2;
};

struct ForestParams {
    int trees = 100;
    int max_depth = 32;
    int min_samples_split = 2;
    int max_features = 0;  // 0: floor(sqrt(d)); negative: all features; otherwise min(value, d)
    bool bootstrap = true;
};

struct KnnParams {
    int k = 5;
};

// Shared by logistic regression and the linear SVM.
struct LinearParams {
    double learning_rate = 0.1;
    int epochs = 50;
    int batch_size = 256;
    double l2 = 1e-4;
};

struct NbParams {
    double var_smoothing = 1e-9;  // fraction of the largest feature variance
};

using Hyperparameters = std::variant<TreeParams, ForestParams, KnnParams, LinearParams, NbParams>;

class ModelSpec {
public:
    // Throws UsageError when the parameters do not belong to the family or are out of range.
    ModelSpec(Family family, Hyperparameters params, std::uint64_t seed = 0);

    static ModelSpec defaults(Family family, std::uint64_t seed = 0);

    Family family() const noexcept { return family_; }
    const Hyperparameters& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }

    template <typename P>
    const P& get() const { return std::get<P>(params_); }

private:
    Family family_;
    Hyperparameters params_;
    std::uint64_t seed_;
};

// Memorised training set; coordinates stored as float.
struct NearestNeighbors {
    MatrixF points;
    Labels labels;
    int k = 5;
};

// One-vs-rest linear scorers: row c of weights and bias(c) score class c.
struct LinearOvr {
    MatrixF weights;
    Eigen::VectorXf bias;
};

struct GaussianNb {
    Eigen::VectorXf prior;
    MatrixF mean;      // n_classes × d
    MatrixF variance;  // n_classes × d, smoothing already added
};

using ModelPayload = std::variant<DecisionTree, RandomForest, NearestNeighbors, LinearOvr, GaussianNb>;

class TrainedModel {
public:
    // Validates payload shapes against the family and dimensions. Throws DataError.
    TrainedModel(Family family, int n_classes, int n_features, ModelPayload payload);

    Family family() const noexcept { return family_; }
    int n_classes() const noexcept { return n_classes_; }
    int n_features() const noexcept { return n_features_; }
    const ModelPayload& payload() const noexcept { return payload_; }

    // Throws DataError on a width mismatch or non-finite input.
    Labels predict(const Matrix& features) const;

    // Bytes held by the model's own buffers.
    std::size_t accounted_bytes() const;

private:
    Family family_;
    int n_classes_;
    int n_features_;
    ModelPayload payload_;
};

// Throws DataError on empty, single-class or non-finite data.
TrainedModel train(const ModelSpec& spec, const Dataset& data);

inline Labels predict(const TrainedModel& model, const Matrix& features) {
    return model.predict(features);
}

// Per-class scores for the linear and Bayes families, used by tests.
Matrix linear_scores(const LinearOvr& model, const Matrix& features);
Matrix nb_log_posteriors(const GaussianNb& model, const Matrix& features);

}  // namespace liteshield
