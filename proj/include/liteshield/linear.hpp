#pragma once

#include "liteshield/models.hpp"
#include "liteshield/types.hpp"

#include <cstdint>

namespace liteshield {

// Mean binary log loss plus (l2/2)·||w||²; targets are 0/1, the bias is not penalised.
double logistic_loss(const Vector& w, double b, const Matrix& x, const Vector& targets, double l2);

// Analytic gradient of logistic_loss.
void logistic_gradient(const Vector& w, double b, const Matrix& x, const Vector& targets, double l2,
                       Vector& grad_w, double& grad_b);

// Mean hinge loss plus (l2/2)·||w||²; targets are -1/+1.
double hinge_loss(const Vector& w, double b, const Matrix& x, const Vector& targets, double l2);

// One-vs-rest mini-batch training. Class c uses its own stream derive_seed(seed, c).
LinearOvr train_logistic_ovr(const Matrix& x, const Labels& y, int n_classes, const LinearParams& params,
                             std::uint64_t seed);
LinearOvr train_svm_ovr(const Matrix& x, const Labels& y, int n_classes, const LinearParams& params,
                        std::uint64_t seed);

}  // namespace liteshield
