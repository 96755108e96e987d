#include "liteshield/linear.hpp"

#include "liteshield/parallel.hpp"
#include "liteshield/random.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace liteshield {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

enum class Loss { logistic, hinge };

// Residual-like term r_i such that the data gradient is Xᵀr / B and the bias gradient mean(r).
void batch_residual(Loss loss, const Vector& scores, const Vector& targets, Vector& r) {
    r.resize(scores.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (loss == Loss::logistic) {
            r(i) = sigmoid(scores(i)) - targets(i);
        } else {
            r(i) = targets(i) * scores(i) < 1.0 ? -targets(i) : 0.0;
        }
    }
}

LinearOvr train_ovr(Loss loss, const Matrix& x, const Labels& y, int n_classes, const LinearParams& params,
                    std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    LinearOvr model;
    model.weights = MatrixF::Zero(n_classes, d);
    model.bias = Eigen::VectorXf::Zero(n_classes);
    const auto batch = static_cast<Eigen::Index>(std::max(1, params.batch_size));

    parallel_for(static_cast<std::size_t>(n_classes), [&](std::size_t cls) {
        Rng rng(derive_seed(seed, cls));
        Vector targets(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool positive = y(i) == static_cast<int>(cls);
            targets(i) = loss == Loss::logistic ? (positive ? 1.0 : 0.0) : (positive ? 1.0 : -1.0);
        }
        Vector w = Vector::Zero(d);
        double b = 0.0;
        std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        Matrix xb;
        Vector tb, r;
        for (int epoch = 0; epoch < params.epochs; ++epoch) {
            shuffle(std::span(order), rng);
            for (Eigen::Index start = 0; start < n; start += batch) {
                const Eigen::Index m = std::min(batch, n - start);
                xb.resize(m, d);
                tb.resize(m);
                for (Eigen::Index i = 0; i < m; ++i) {
                    const auto row = order[static_cast<std::size_t>(start + i)];
                    xb.row(i) = x.row(row);
                    tb(i) = targets(row);
                }
                const Vector scores = (xb * w).array() + b;
                batch_residual(loss, scores, tb, r);
                const Vector grad_w = xb.transpose() * r / static_cast<double>(m) + params.l2 * w;
                const double grad_b = r.mean();
                w -= params.learning_rate * grad_w;
                b -= params.learning_rate * grad_b;
            }
        }
        model.weights.row(static_cast<Eigen::Index>(cls)) = w.cast<float>().transpose();
        model.bias(static_cast<Eigen::Index>(cls)) = static_cast<float>(b);
    });
    return model;
}

}  // namespace

double logistic_loss(const Vector& w, double b, const Matrix& x, const Vector& targets, double l2) {
    const Vector scores = (x * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        // -[t log σ(z) + (1-t) log(1-σ(z))] = softplus(z) - t z
        loss += softplus(scores(i)) - targets(i) * scores(i);
    }
    return loss / static_cast<double>(scores.size()) + 0.5 * l2 * w.squaredNorm();
}

void logistic_gradient(const Vector& w, double b, const Matrix& x, const Vector& targets, double l2,
                       Vector& grad_w, double& grad_b) {
    const Vector scores = (x * w).array() + b;
    Vector r;
    batch_residual(Loss::logistic, scores, targets, r);
    grad_w = x.transpose() * r / static_cast<double>(x.rows()) + l2 * w;
    grad_b = r.mean();
}

double hinge_loss(const Vector& w, double b, const Matrix& x, const Vector& targets, double l2) {
    const Vector scores = (x * w).array() + b;
    double loss = 0.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) loss += std::max(0.0, 1.0 - targets(i) * scores(i));
    return loss / static_cast<double>(scores.size()) + 0.5 * l2 * w.squaredNorm();
}

LinearOvr train_logistic_ovr(const Matrix& x, const Labels& y, int n_classes, const LinearParams& params,
                             std::uint64_t seed) {
    return train_ovr(Loss::logistic, x, y, n_classes, params, seed);
}

LinearOvr train_svm_ovr(const Matrix& x, const Labels& y, int n_classes, const LinearParams& params,
                        std::uint64_t seed) {
    return train_ovr(Loss::hinge, x, y, n_classes, params, seed);
}

}  // namespace liteshield
