#include "liteshield/models.hpp"

#include "liteshield/error.hpp"
#include "liteshield/linear.hpp"
#include "liteshield/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

namespace liteshield {

std::string_view to_string(Family family) {
    switch (family) {
        case Family::dt: return "dt";
        case Family::rf: return "rf";
        case Family::knn: return "knn";
        case Family::lr: return "lr";
        case Family::nb: return "nb";
        case Family::svm: return "svm";
    }
    return "?";
}

Family parse_family(std::string_view text) {
    for (Family f : all_families) {
        if (text == to_string(f)) return f;
    }
    throw UsageError("unknown model family '" + std::string(text) + "' (expected dt, rf, knn, lr, nb or svm)");
}

namespace {

template <typename P>
const P& expect_params(Family family, const Hyperparameters& params) {
    const P* p = std::get_if<P>(&params);
    if (!p) throw UsageError("hyperparameters do not match family " + std::string(to_string(family)));
    return *p;
}

void require(bool ok, Family family, const char* what) {
    if (!ok) throw UsageError(std::string(to_string(family)) + ": " + what);
}

}  // namespace

ModelSpec::ModelSpec(Family family, Hyperparameters params, std::uint64_t seed)
    : family_(family), params_(std::move(params)), seed_(seed) {
    switch (family_) {
        case Family::dt: {
            const auto& p = expect_params<TreeParams>(family_, params_);
            require(p.max_depth >= 1, family_, "max_depth must be >= 1");
            require(p.min_samples_split >= 2, family_, "min_samples_split must be >= 2");
            break;
        }
        case Family::rf: {
            const auto& p = expect_params<ForestParams>(family_, params_);
            require(p.trees >= 1, family_, "trees must be >= 1");
            require(p.max_depth >= 1, family_, "max_depth must be >= 1");
            require(p.min_samples_split >= 2, family_, "min_samples_split must be >= 2");
            break;
        }
        case Family::knn:
            require(expect_params<KnnParams>(family_, params_).k >= 1, family_, "k must be >= 1");
            break;
        case Family::lr:
        case Family::svm: {
            const auto& p = expect_params<LinearParams>(family_, params_);
            require(p.learning_rate > 0.0 && std::isfinite(p.learning_rate), family_, "learning_rate must be > 0");
            require(p.epochs >= 1, family_, "epochs must be >= 1");
            require(p.batch_size >= 1, family_, "batch_size must be >= 1");
            require(p.l2 >= 0.0 && std::isfinite(p.l2), family_, "l2 must be >= 0");
            break;
        }
        case Family::nb: {
            const auto& p = expect_params<NbParams>(family_, params_);
            require(p.var_smoothing > 0.0 && std::isfinite(p.var_smoothing), family_, "var_smoothing must be > 0");
            break;
        }
    }
}

ModelSpec ModelSpec::defaults(Family family, std::uint64_t seed) {
    switch (family) {
        case Family::dt: return ModelSpec(family, TreeParams{}, seed);
        case Family::rf: return ModelSpec(family, ForestParams{}, seed);
        case Family::knn: return ModelSpec(family, KnnParams{}, seed);
        case Family::lr:
        case Family::svm: return ModelSpec(family, LinearParams{}, seed);
        case Family::nb: return ModelSpec(family, NbParams{}, seed);
    }
    throw UsageError("unknown family");
}

TrainedModel::TrainedModel(Family family, int n_classes, int n_features, ModelPayload payload)
    : family_(family), n_classes_(n_classes), n_features_(n_features), payload_(std::move(payload)) {
    if (n_classes_ < 2) throw DataError("model needs at least 2 classes");
    if (n_features_ < 1) throw DataError("model needs at least 1 feature");
    auto check_tree = [&](const DecisionTree& tree) {
        if (tree.n_classes() != n_classes_) throw DataError("tree class count does not match model");
        for (const auto& node : tree.nodes()) {
            if (node.feature >= n_features_) throw DataError("tree split feature out of range");
        }
    };
    const auto expected = [&](std::size_t index) {
        if (payload_.index() != index) throw DataError("payload does not match family " + std::string(to_string(family_)));
    };
    switch (family_) {
        case Family::dt:
            expected(0);
            check_tree(std::get<DecisionTree>(payload_));
            break;
        case Family::rf:
            expected(1);
            for (const auto& t : std::get<RandomForest>(payload_).trees()) check_tree(t);
            break;
        case Family::knn: {
            expected(2);
            const auto& m = std::get<NearestNeighbors>(payload_);
            if (m.points.cols() != n_features_ || m.points.rows() != m.labels.size() || m.points.rows() == 0 || m.k < 1) {
                throw DataError("knn payload has inconsistent shape");
            }
            if ((m.labels.array() < 0).any() || (m.labels.array() >= n_classes_).any()) {
                throw DataError("knn label out of range");
            }
            break;
        }
        case Family::lr:
        case Family::svm: {
            expected(3);
            const auto& m = std::get<LinearOvr>(payload_);
            if (m.weights.rows() != n_classes_ || m.weights.cols() != n_features_ || m.bias.size() != n_classes_) {
                throw DataError("linear payload has inconsistent shape");
            }
            break;
        }
        case Family::nb: {
            expected(4);
            const auto& m = std::get<GaussianNb>(payload_);
            if (m.prior.size() != n_classes_ || m.mean.rows() != n_classes_ || m.mean.cols() != n_features_ ||
                m.variance.rows() != n_classes_ || m.variance.cols() != n_features_) {
                throw DataError("naive bayes payload has inconsistent shape");
            }
            if (!(m.variance.array() > 0.0f).all()) throw DataError("naive bayes variance must be positive");
            break;
        }
    }
}

namespace {

// Ties go to the lower class index.
int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& scores) {
    int best = 0;
    for (Eigen::Index c = 1; c < scores.size(); ++c) {
        if (scores(c) > scores(best)) best = static_cast<int>(c);
    }
    return best;
}

Labels predict_knn(const NearestNeighbors& m, int n_classes, const Matrix& x) {
    Labels out(x.rows());
    const Eigen::Index n = m.points.rows();
    const Eigen::Index d = m.points.cols();
    const auto k = static_cast<std::size_t>(std::min<Eigen::Index>(m.k, n));
    constexpr Eigen::Index block = 64;
    const auto blocks = static_cast<std::size_t>((x.rows() + block - 1) / block);
    parallel_for(blocks, [&](std::size_t b) {
        using Entry = std::pair<double, Eigen::Index>;  // (distance², training row)
        std::priority_queue<Entry> heap;                // worst neighbour on top
        std::vector<int> votes(static_cast<std::size_t>(n_classes));
        const Eigen::Index first = static_cast<Eigen::Index>(b) * block;
        const Eigen::Index last = std::min(first + block, x.rows());
        for (Eigen::Index q = first; q < last; ++q) {
            heap = {};
            const double* query = x.row(q).data();
            for (Eigen::Index i = 0; i < n; ++i) {
                const float* p = m.points.row(i).data();
                double dist = 0.0;
                for (Eigen::Index j = 0; j < d; ++j) {
                    const double diff = static_cast<double>(p[j]) - query[j];
                    dist += diff * diff;
                }
                if (heap.size() < k) {
                    heap.emplace(dist, i);
                } else if (Entry{dist, i} < heap.top()) {
                    heap.pop();
                    heap.emplace(dist, i);
                }
            }
            std::fill(votes.begin(), votes.end(), 0);
            while (!heap.empty()) {
                ++votes[static_cast<std::size_t>(m.labels(heap.top().second))];
                heap.pop();
            }
            out(q) = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        }
    });
    return out;
}

}  // namespace

Matrix linear_scores(const LinearOvr& model, const Matrix& features) {
    const Matrix w = model.weights.cast<double>();
    return (features * w.transpose()).rowwise() + model.bias.cast<double>().transpose();
}

Matrix nb_log_posteriors(const GaussianNb& model, const Matrix& features) {
    const Eigen::Index k = model.mean.rows();
    const Eigen::Index d = model.mean.cols();
    Matrix out(features.rows(), k);
    for (Eigen::Index c = 0; c < k; ++c) {
        double base = std::log(static_cast<double>(model.prior(c)));
        for (Eigen::Index j = 0; j < d; ++j) {
            base -= 0.5 * std::log(2.0 * std::numbers::pi * static_cast<double>(model.variance(c, j)));
        }
        for (Eigen::Index r = 0; r < features.rows(); ++r) {
            double s = base;
            for (Eigen::Index j = 0; j < d; ++j) {
                const double diff = features(r, j) - static_cast<double>(model.mean(c, j));
                s -= 0.5 * diff * diff / static_cast<double>(model.variance(c, j));
            }
            out(r, c) = s;
        }
    }
    return out;
}

Labels TrainedModel::predict(const Matrix& features) const {
    if (features.cols() != n_features_) {
        throw DataError("expected " + std::to_string(n_features_) + " features per row, got " +
                        std::to_string(features.cols()));
    }
    if (!features.allFinite()) throw DataError("prediction input contains non-finite values");

    Labels out(features.rows());
    switch (family_) {
        case Family::dt: {
            const auto& tree = std::get<DecisionTree>(payload_);
            for (Eigen::Index r = 0; r < features.rows(); ++r) out(r) = tree.predict_row(features.row(r));
            break;
        }
        case Family::rf: {
            const auto& forest = std::get<RandomForest>(payload_);
            constexpr Eigen::Index block = 256;
            const auto blocks = static_cast<std::size_t>((features.rows() + block - 1) / block);
            parallel_for(blocks, [&](std::size_t b) {
                std::vector<int> votes(static_cast<std::size_t>(n_classes_));
                const Eigen::Index first = static_cast<Eigen::Index>(b) * block;
                const Eigen::Index last = std::min(first + block, features.rows());
                for (Eigen::Index r = first; r < last; ++r) out(r) = forest.predict_row(features.row(r), votes);
            });
            break;
        }
        case Family::knn:
            out = predict_knn(std::get<NearestNeighbors>(payload_), n_classes_, features);
            break;
        case Family::lr:
        case Family::svm: {
            const Matrix scores = linear_scores(std::get<LinearOvr>(payload_), features);
            for (Eigen::Index r = 0; r < scores.rows(); ++r) out(r) = argmax_row(scores.row(r));
            break;
        }
        case Family::nb: {
            const Matrix scores = nb_log_posteriors(std::get<GaussianNb>(payload_), features);
            for (Eigen::Index r = 0; r < scores.rows(); ++r) out(r) = argmax_row(scores.row(r));
            break;
        }
    }
    return out;
}

std::size_t TrainedModel::accounted_bytes() const {
    return std::visit(
        [](const auto& p) -> std::size_t {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTree> || std::is_same_v<T, RandomForest>) {
                return p.accounted_bytes();
            } else if constexpr (std::is_same_v<T, NearestNeighbors>) {
                return static_cast<std::size_t>(p.points.size()) * sizeof(float) +
                       static_cast<std::size_t>(p.labels.size()) * sizeof(int);
            } else if constexpr (std::is_same_v<T, LinearOvr>) {
                return static_cast<std::size_t>(p.weights.size() + p.bias.size()) * sizeof(float);
            } else {
                return static_cast<std::size_t>(p.prior.size() + p.mean.size() + p.variance.size()) * sizeof(float);
            }
        },
        payload_);
}

namespace {

GaussianNb train_nb(const Dataset& data, const NbParams& params) {
    const int k = data.n_classes();
    const Eigen::Index d = data.dims();
    const auto n = static_cast<double>(data.rows());

    const Eigen::RowVectorXd overall_mean = data.features.colwise().mean();
    const double max_var = ((data.features.rowwise() - overall_mean).array().square().colwise().sum() / n).maxCoeff();
    const double epsilon = max_var > 0.0 ? params.var_smoothing * max_var : params.var_smoothing;

    GaussianNb m;
    m.prior.resize(k);
    m.mean = MatrixF::Zero(k, d);
    m.variance = MatrixF::Zero(k, d);
    const auto counts = data.class_counts();
    for (int c = 0; c < k; ++c) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(d);
        for (Eigen::Index r = 0; r < data.rows(); ++r) {
            if (data.labels(r) == c) sum += data.features.row(r);
        }
        const double cnt = static_cast<double>(counts[static_cast<std::size_t>(c)]);
        const Eigen::RowVectorXd mean = cnt > 0 ? Eigen::RowVectorXd(sum / cnt) : Eigen::RowVectorXd::Zero(d);
        Eigen::RowVectorXd ss = Eigen::RowVectorXd::Zero(d);
        for (Eigen::Index r = 0; r < data.rows(); ++r) {
            if (data.labels(r) == c) ss += (data.features.row(r) - mean).array().square().matrix();
        }
        const Eigen::RowVectorXd var = (cnt > 0 ? Eigen::RowVectorXd(ss / cnt) : Eigen::RowVectorXd::Ones(d)).array() + epsilon;
        m.prior(c) = static_cast<float>(cnt / n);
        m.mean.row(c) = mean.cast<float>();
        m.variance.row(c) = var.cast<float>().cwiseMax(std::numeric_limits<float>::min());
    }
    return m;
}

}  // namespace

TrainedModel train(const ModelSpec& spec, const Dataset& data) {
    if (data.rows() == 0 || data.dims() == 0) throw DataError("cannot train on an empty dataset");
    data.validate();
    const auto counts = data.class_counts();
    if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2) {
        throw DataError("cannot train on single-class data");
    }
    const int k = data.n_classes();
    const auto d = static_cast<int>(data.dims());

    switch (spec.family()) {
        case Family::dt: {
            const auto& p = spec.get<TreeParams>();
            std::vector<Eigen::Index> sample(static_cast<std::size_t>(data.rows()));
            std::iota(sample.begin(), sample.end(), Eigen::Index{0});
            Rng rng(spec.seed());
            auto tree = DecisionTree::grow(data.features, data.labels, k, std::move(sample),
                                           TreeOptions{p.max_depth, p.min_samples_split, -1}, rng);
            return TrainedModel(Family::dt, k, d, std::move(tree));
        }
        case Family::rf: {
            const auto& p = spec.get<ForestParams>();
            ForestOptions options;
            options.trees = p.trees;
            options.bootstrap = p.bootstrap;
            options.tree = {p.max_depth, p.min_samples_split,
                            p.max_features == 0 ? sqrt_features(d) : (p.max_features < 0 ? -1 : p.max_features)};
            auto forest = RandomForest::grow(data.features, data.labels, k, options, spec.seed());
            return TrainedModel(Family::rf, k, d, std::move(forest));
        }
        case Family::knn: {
            NearestNeighbors m;
            m.points = data.features.cast<float>();
            m.labels = data.labels;
            m.k = spec.get<KnnParams>().k;
            return TrainedModel(Family::knn, k, d, std::move(m));
        }
        case Family::lr:
            return TrainedModel(Family::lr, k, d,
                                train_logistic_ovr(data.features, data.labels, k, spec.get<LinearParams>(), spec.seed()));
        case Family::svm:
            return TrainedModel(Family::svm, k, d,
                                train_svm_ovr(data.features, data.labels, k, spec.get<LinearParams>(), spec.seed()));
        case Family::nb:
            return TrainedModel(Family::nb, k, d, train_nb(data, spec.get<NbParams>()));
    }
    throw UsageError("unknown family");
}

}  // namespace liteshield
